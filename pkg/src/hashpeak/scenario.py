"""Stochastic projection of the model past the end of the historical data."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import coins
from .dynamics import Trajectory, n_steps, simulate
from .econ import MiningParams
from .series import ExogenousSeries, SeriesError, day_to_date, splice

GENERATOR = "numpy.random.Generator(PCG64)"

# block 210000 * k was actually mined on these days (for reporting only)
OBSERVED_HALVINGS = {1: "2012-11-28", 2: "2016-07-09", 3: "2020-05-11", 4: "2024-04-20"}


@dataclass(frozen=True)
class ScenarioSpec:
    t_start: float = 4100.0
    t_end: float = 7500.0
    price_mean: float = 7300.0
    price_sd: float = 500.0
    fees_mean: float = 30.0
    fees_sd: float = 5.0
    correlation_time: float = 28.0
    seed: int = 0

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must be after t_start ({self.t_start})")
        if self.price_sd < 0 or self.fees_sd < 0:
            raise ValueError("standard deviations must be >= 0")
        if not self.correlation_time > 0:
            raise ValueError("correlation_time must be > 0")

    def to_dict(self):
        return asdict(self)


def pink_noise(mean, sd, tau_c, t_start, t_end, dt=1.0, seed=0, name="noise",
               unit="", rng=None) -> ExogenousSeries:
    """First-order-filtered white noise around ``mean``, floored at zero.

    x[k+1] = x[k] + (dt/tau_c)(mean - x[k]) + sd*sqrt(2 dt/tau_c)*z[k], x[0] = mean.
    """
    if not tau_c > dt > 0:
        raise ValueError(f"need tau_c > dt > 0, got tau_c={tau_c}, dt={dt}")
    n = n_steps(t_end - t_start, dt) + 1
    rng = rng if rng is not None else np.random.default_rng(seed)
    z = rng.standard_normal(n - 1)
    a = dt / tau_c
    b = sd * math.sqrt(2.0 * a)
    x = np.empty(n)
    x[0] = mean
    xk = float(mean)
    for k in range(n - 1):
        xk = xk + a * (mean - xk) + b * z[k]
        x[k + 1] = xk
    np.maximum(x, 0.0, out=x)
    return ExogenousSeries(name, unit, t_start + np.arange(n) * dt, x)


def halving_days(params: MiningParams | None, t_end: float) -> list[float]:
    """Halving days on the model's target-rate calendar up to ``t_end``."""
    return coins.halving_days(t_end)


def future_inputs(spec: ScenarioSpec, dt: float = 1.0):
    """Generated (price, fees) series over [t_start, t_end]; one generator, price first."""
    rng = np.random.default_rng(spec.seed)
    price = pink_noise(spec.price_mean, spec.price_sd, spec.correlation_time,
                       spec.t_start, spec.t_end, dt, name="future-price",
                       unit="USD/BTC", rng=rng)
    fees = pink_noise(spec.fees_mean, spec.fees_sd, spec.correlation_time,
                      spec.t_start, spec.t_end, dt, name="future-fees",
                      unit="BTC/day", rng=rng)
    return price, fees


def project(params: MiningParams, historical_price: ExogenousSeries,
            historical_fees: ExogenousSeries, spec: ScenarioSpec) -> Trajectory:
    """Simulate 0 -> t_end on history spliced with generated future inputs.

    Hardware efficiency is held at its ``t_start`` value for the projection.
    """
    for s in (historical_price, historical_fees):
        if not s.covers(0.0, spec.t_start):
            raise SeriesError(f"{s.name} does not cover [0, {spec.t_start}]")
    fut_price, fut_fees = future_inputs(spec, params.dt)
    price = splice(historical_price.restrict(0.0, spec.t_start), fut_price)
    fees = splice(historical_fees.restrict(0.0, spec.t_start), fut_fees)
    return simulate(params.frozen_efficiency(spec.t_start), price, fees, spec.t_end)


def summarize(traj: Trajectory, spec: ScenarioSpec) -> dict:
    """Peak, terminal value and halving calendar of a projection."""
    i_peak = int(np.argmax(traj.hash_rate_ghs))
    halvings = halving_days(None, spec.t_end)
    # first day at or after each projected halving with negative profit
    sign_flips = {}
    for d in halvings:
        if d < spec.t_start:
            continue
        neg = np.nonzero((traj.t >= d) & (traj.profit_usd < 0))[0]
        sign_flips[repr(d)] = float(traj.t[neg[0]]) if len(neg) else None
    eras = []
    for k, d in enumerate(halvings + [spec.t_end], start=0):
        lo = halvings[k - 1] if k else 0.0
        m = (traj.t >= lo) & (traj.t < d)
        if m.any():
            eras.append({"era": k, "from_day": lo, "to_day": d,
                         "end_hash_rate": float(traj.hash_rate_ghs[m][-1])})
    return {
        "halving_days": halvings,
        "halving_dates": [str(day_to_date(d)) for d in halvings],
        "observed_halving_dates": [OBSERVED_HALVINGS.get(k + 1) for k in range(len(halvings))],
        "peak_hash_rate": float(traj.hash_rate_ghs[i_peak]),
        "peak_day": float(traj.t[i_peak]),
        "terminal_hash_rate": float(traj.hash_rate_ghs[-1]),
        "profit_negative_after_halving": sign_flips,
        "eras": eras,
        "seed": spec.seed,
        "generator": GENERATOR,
        "spec": spec.to_dict(),
    }
