"""Forward integration of the coupled coin-supply / hash-rate feedback model."""
from __future__ import annotations

import csv
import functools
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .coins import TOTAL_BTC, CoinState, coin_step, subsidy_at_height
from .econ import (SECONDS_PER_DAY, MiningParams, adjustment_time, efficiency_at,
                   hash_rate_shortfall, mining_revenues)
from .series import ExogenousSeries, SeriesError

log = logging.getLogger(__name__)

HASH_RATE_FLOOR = 1e-12  # GH/s


@dataclass(frozen=True)
class SimState:
    t: float
    coin: CoinState
    hash_rate: float


@dataclass
class Trajectory:
    """Column-oriented record of every model variable at each step."""

    t: np.ndarray
    height: np.ndarray
    circulating: np.ndarray
    subsidy: np.ndarray
    price: np.ndarray
    fees: np.ndarray
    revenues_usd: np.ndarray
    cost_usd: np.ndarray
    profit_usd: np.ndarray
    shortfall_ghs: np.ndarray
    hash_rate_ghs: np.ndarray
    tau_days: np.ndarray
    warnings: list = field(default_factory=list, compare=False)

    @classmethod
    def columns(cls):
        return tuple(f.name for f in fields(cls) if f.name != "warnings")

    def __len__(self):
        return len(self.t)

    @property
    def remaining(self) -> np.ndarray:
        return TOTAL_BTC - self.circulating

    def at(self, t) -> np.ndarray:
        """Hash rate linearly interpolated at day(s) ``t``."""
        return np.interp(t, self.t, self.hash_rate_ghs)

    def slice(self, t0, t1) -> "Trajectory":
        m = (self.t >= t0) & (self.t <= t1)
        return Trajectory(*(getattr(self, c)[m] for c in self.columns()),
                          warnings=list(self.warnings))

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = [getattr(self, c).tolist() for c in self.columns()]
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns())
            for row in zip(*cols):
                w.writerow([repr(v) for v in row])
        return path

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if tuple(header) != cls.columns():
            raise ValueError(f"{path}: unexpected trajectory header {header}")
        data = np.array(body, dtype=float).reshape(len(body), len(header))
        return cls(*(data[:, i].copy() for i in range(len(header))))


def step(state: SimState, params: MiningParams, price: ExogenousSeries,
         fees: ExogenousSeries) -> SimState:
    """One explicit-Euler step, all flows evaluated at the start of the step."""
    t, h = state.t, state.hash_rate
    revenues = mining_revenues(subsidy_at_height(state.coin.height),
                               fees.value_at(t), price.value_at(t))
    shortfall = hash_rate_shortfall(revenues, h, params, t)
    h_next = h + params.dt * shortfall / adjustment_time(params, t)
    if h_next < HASH_RATE_FLOOR:
        log.warning("hash rate floored at day %s (dt too large for tau?)", t)
        h_next = HASH_RATE_FLOOR
    return SimState(t + params.dt, coin_step(state.coin, params.dt), h_next)


@functools.lru_cache(maxsize=16)
def _coin_path(dt: float, n: int):
    heights = np.empty(n)
    circ = np.empty(n)
    coin = CoinState()
    for k in range(n):
        heights[k], circ[k] = coin.height, coin.circulating
        coin = coin_step(coin, dt)
    heights.flags.writeable = False
    circ.flags.writeable = False
    return heights, circ


def n_steps(t_end: float, dt: float) -> int:
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not a multiple of dt={dt}")
    return n


class Prepared:
    """Tau-independent inputs of a run, precomputed on the step grid.

    Calibration re-runs the loop for many adjustment times over the same
    inputs; only :meth:`run` depends on the regimes.
    """

    def __init__(self, params: MiningParams, price: ExogenousSeries,
                 fees: ExogenousSeries, t_end: float):
        if t_end <= 0:
            raise ValueError(f"t_end must be > 0, got {t_end!r}")
        for s in (price, fees):
            if not s.covers(0.0, t_end):
                raise SeriesError(
                    f"{s.name} covers [{s.first_day}, {s.last_day}], "
                    f"simulation needs [0, {t_end}]")
        self.params = params
        dt = params.dt
        n = n_steps(t_end, dt) + 1
        self.t = np.arange(n) * dt
        self.height, self.circulating = _coin_path(dt, n)
        self.subsidy = np.array([subsidy_at_height(h) for h in self.height])
        self.price = price.values_at(self.t)
        self.fees = fees.values_at(self.t)
        self.revenues = np.array([mining_revenues(s, f, p) for s, f, p in
                                  zip(self.subsidy.tolist(), self.fees.tolist(),
                                      self.price.tolist())])
        self.eff = np.array([efficiency_at(params, t) for t in self.t.tolist()])

    def taus(self, regimes) -> np.ndarray:
        untils = np.array([u for u, _ in regimes])
        values = np.array([tau for _, tau in regimes])
        return values[np.searchsorted(untils, self.t, side="right")]

    def run(self, regimes=None, with_warnings=True) -> Trajectory:
        params = self.params if regimes is None else self.params.with_taus(regimes)
        tau = self.taus(params.adjustment_regimes)
        dt, ep = params.dt, params.energy_price
        n = len(self.t)
        hash_rate = np.empty(n)
        cost = np.empty(n)
        shortfall = np.empty(n)
        floored = []
        h = params.initial_hash_rate
        revs, effs, taus = self.revenues.tolist(), self.eff.tolist(), tau.tolist()
        # same operation order as econ.hash_rate_shortfall so step() agrees bitwise
        for k in range(n):
            eff = effs[k]
            c = h * SECONDS_PER_DAY * (ep / eff)
            sf = (revs[k] - c) * eff / (ep * SECONDS_PER_DAY)
            hash_rate[k], cost[k], shortfall[k] = h, c, sf
            h = h + dt * sf / taus[k]
            if h < HASH_RATE_FLOOR:
                floored.append(float(self.t[k]))
                h = HASH_RATE_FLOOR
        warnings = []
        if floored:
            warnings.append(f"hash rate floored at {HASH_RATE_FLOOR} GH/s on "
                            f"{len(floored)} step(s), first at day {floored[0]}")
            if with_warnings:
                log.warning(warnings[-1])
        return Trajectory(self.t.copy(), np.array(self.height), np.array(self.circulating),
                          self.subsidy.copy(), self.price.copy(), self.fees.copy(),
                          self.revenues.copy(), cost, self.revenues - cost, shortfall,
                          hash_rate, tau, warnings)


def simulate(params: MiningParams, price: ExogenousSeries, fees: ExogenousSeries,
             t_end: float) -> Trajectory:
    """Integrate from day 0 (empty chain, initial hash rate) to ``t_end``."""
    return Prepared(params, price, fees, t_end).run()


def check_trajectory(traj: Trajectory, params: MiningParams, rtol=1e-9) -> list[str]:
    """Recompute each record from its own columns; return descriptions of mismatches."""
    problems = []
    d = np.diff(traj.t)
    if len(d) and (np.any(d <= 0) or np.ptp(d) > 1e-9 * max(1.0, traj.t[-1])):
        problems.append("t is not strictly increasing with uniform spacing")
    rev = (traj.subsidy * 144 + traj.fees) * traj.price
    eff = np.array([efficiency_at(params, t) for t in traj.t])
    cost = traj.hash_rate_ghs * SECONDS_PER_DAY * params.energy_price / eff
    sf = (rev - cost) * eff / (params.energy_price * SECONDS_PER_DAY)
    for name, want, got in [("revenues_usd", rev, traj.revenues_usd),
                            ("cost_usd", cost, traj.cost_usd),
                            ("profit_usd", rev - cost, traj.profit_usd),
                            ("shortfall_ghs", sf, traj.shortfall_ghs)]:
        scale = np.maximum(np.abs(want), np.abs(rev) + np.abs(cost)) + 1e-300
        if np.any(np.abs(want - got) > rtol * scale):
            problems.append(f"{name} inconsistent with the other columns")
    sub = np.array([subsidy_at_height(h) for h in traj.height])
    if not np.array_equal(sub, traj.subsidy):
        problems.append("subsidy inconsistent with height")
    return problems
