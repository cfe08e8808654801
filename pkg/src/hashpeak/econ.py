"""Mining economics: hashing cost, revenues, cost, profit and hash-rate shortfall."""
from __future__ import annotations

import bisect
import math
from dataclasses import asdict, dataclass, field, replace

from .coins import BLOCKS_PER_DAY

SECONDS_PER_DAY = 86_400.0
JOULES_PER_KWH = 3.6e6


def usd_per_kwh(price: float) -> float:
    """Convert an energy price in USD/kWh to USD/J."""
    return price / JOULES_PER_KWH


@dataclass(frozen=True)
class EfficiencyEpoch:
    from_day: float
    to_day: float  # math.inf for the open-ended last epoch
    efficiency: float  # MH/J
    label: str = ""


DEFAULT_EPOCHS = (
    EfficiencyEpoch(0, 600, 0.1, "CPU"),
    EfficiencyEpoch(600, 1000, 1.0, "GPU"),
    EfficiencyEpoch(1000, 1400, 10.0, "FPGA"),
    EfficiencyEpoch(1400, 1550, 100.0, "ASIC (110 nm)"),
    EfficiencyEpoch(1550, 1900, 500.0, "ASIC (55 nm)"),
    EfficiencyEpoch(1900, 2450, 1000.0, "ASIC (28 nm)"),
    EfficiencyEpoch(2450, math.inf, 10000.0, "ASIC (16 nm)"),
)

SINGLE_REGIME = ((math.inf, 1112.0),)
TWO_REGIME = ((3777.0, 1482.0), (math.inf, 264.0))


class ParamsError(ValueError):
    pass


@dataclass(frozen=True)
class MiningParams:
    """Model constants. ``adjustment_regimes`` is a sorted tuple of (until_day, tau)."""

    energy_price: float = usd_per_kwh(0.05)  # USD/J
    epochs: tuple = DEFAULT_EPOCHS
    initial_hash_rate: float = 0.007  # GH/s
    adjustment_regimes: tuple = TWO_REGIME
    dt: float = 1.0
    _starts: tuple = field(init=False, repr=False, compare=False)
    _untils: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        epochs = tuple(e if isinstance(e, EfficiencyEpoch) else EfficiencyEpoch(*e)
                       for e in self.epochs)
        regimes = tuple((float(u), float(tau)) for u, tau in self.adjustment_regimes)
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "adjustment_regimes", regimes)
        self._validate()
        object.__setattr__(self, "_starts", tuple(e.from_day for e in epochs))
        object.__setattr__(self, "_untils", tuple(u for u, _ in regimes))

    def _validate(self):
        if not self.energy_price > 0:
            raise ParamsError("energy_price must be > 0")
        if not self.initial_hash_rate > 0:
            raise ParamsError("initial_hash_rate must be > 0")
        if not self.dt > 0:
            raise ParamsError("dt must be > 0")
        eps = self.epochs
        if not eps or eps[0].from_day != 0:
            raise ParamsError("efficiency epochs must start at day 0")
        for a, b in zip(eps, eps[1:]):
            if a.to_day != b.from_day:
                raise ParamsError(f"epochs {a.label!r} and {b.label!r} leave a gap or overlap")
            if b.efficiency < a.efficiency:
                raise ParamsError("epoch efficiency must be non-decreasing")
        if eps[-1].to_day != math.inf:
            raise ParamsError("last efficiency epoch must be open-ended")
        if any(not e.efficiency > 0 for e in eps):
            raise ParamsError("epoch efficiency must be > 0")
        regs = self.adjustment_regimes
        if not regs:
            raise ParamsError("at least one adjustment regime required")
        if any(not tau > 0 for _, tau in regs):
            raise ParamsError("every adjustment time must be > 0")
        if any(a[0] >= b[0] for a, b in zip(regs, regs[1:])):
            raise ParamsError("adjustment regimes must be sorted by until_day")
        if regs[-1][0] != math.inf:
            raise ParamsError("last adjustment regime must be open-ended")
        # a first-order decay stays positive only while dt < tau
        if self.dt >= min(tau for _, tau in regs):
            raise ParamsError(f"dt={self.dt} must be smaller than every adjustment time")

    def with_taus(self, regimes) -> "MiningParams":
        return replace(self, adjustment_regimes=tuple(regimes))

    def frozen_efficiency(self, t: float) -> "MiningParams":
        """Copy whose efficiency stays at its day-``t`` value from ``t`` onwards."""
        keep = [e for e in self.epochs if e.from_day <= t]
        last = replace(keep[-1], to_day=math.inf)
        return replace(self, epochs=tuple(keep[:-1]) + (last,))

    def to_dict(self) -> dict:
        def fin(x):
            return None if x == math.inf else x
        return {
            "energy_price": self.energy_price,
            "epochs": [{**asdict(e), "to_day": fin(e.to_day)} for e in self.epochs],
            "initial_hash_rate": self.initial_hash_rate,
            "adjustment_regimes": [[fin(u), tau] for u, tau in self.adjustment_regimes],
            "dt": self.dt,
        }

    @classmethod
    def from_dict(cls, d: dict, base: "MiningParams | None" = None) -> "MiningParams":
        """Overlay the keys of ``d`` onto ``base`` (defaults if omitted).

        ``energy_price_kwh`` may be given instead of ``energy_price`` (USD/J).
        """
        def inf(x):
            return math.inf if x is None else float(x)
        base = base or cls()
        kw = {}
        if "energy_price" in d:
            kw["energy_price"] = float(d["energy_price"])
        if "energy_price_kwh" in d:
            kw["energy_price"] = usd_per_kwh(float(d["energy_price_kwh"]))
        if "epochs" in d:
            kw["epochs"] = tuple(
                EfficiencyEpoch(float(e["from_day"]), inf(e.get("to_day")),
                                float(e["efficiency"]), e.get("label", ""))
                for e in d["epochs"])
        if "initial_hash_rate" in d:
            kw["initial_hash_rate"] = float(d["initial_hash_rate"])
        if "adjustment_regimes" in d:
            kw["adjustment_regimes"] = tuple((inf(u), float(tau))
                                             for u, tau in d["adjustment_regimes"])
        if "dt" in d:
            kw["dt"] = float(d["dt"])
        unknown = set(d) - {"energy_price", "energy_price_kwh", "epochs",
                            "initial_hash_rate", "adjustment_regimes", "dt"}
        if unknown:
            raise ParamsError(f"unknown parameter(s): {sorted(unknown)}")
        return replace(base, **kw)


def efficiency_at(params: MiningParams, t: float) -> float:
    """State-of-the-art efficiency in GH/J; a boundary day belongs to the newer epoch."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    i = bisect.bisect_right(params._starts, t) - 1
    return params.epochs[i].efficiency / 1000.0


def adjustment_time(params: MiningParams, t: float) -> float:
    """Tau of the first regime whose until_day is after ``t``."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    return params.adjustment_regimes[bisect.bisect_right(params._untils, t)][1]


def hashing_cost(params: MiningParams, t: float) -> float:
    """USD per GH computed."""
    return params.energy_price / efficiency_at(params, t)


def mining_revenues(subsidy: float, fees: float, price: float) -> float:
    """Daily USD revenue from block subsidies (BTC/block) plus fees (BTC/day)."""
    return (subsidy * BLOCKS_PER_DAY + fees) * price


def mining_cost(hash_rate: float, params: MiningParams, t: float) -> float:
    """Daily USD energy bill of the network."""
    return hash_rate * SECONDS_PER_DAY * hashing_cost(params, t)


def mining_profit(revenues: float, hash_rate: float, params: MiningParams, t: float) -> float:
    return revenues - mining_cost(hash_rate, params, t)


def hash_rate_shortfall(revenues: float, hash_rate: float, params: MiningParams,
                        t: float) -> float:
    """Hash rate (GH/s) the daily profit could still pay the energy for.

    Profit in USD/day becomes affordable power in J/s via the energy price, and
    power becomes hash rate via the hardware efficiency.
    """
    profit = mining_profit(revenues, hash_rate, params, t)
    return profit * efficiency_at(params, t) / (params.energy_price * SECONDS_PER_DAY)


def equilibrium_hash_rate(subsidy: float, fees: float, price: float,
                          params: MiningParams, t: float) -> float:
    """Zero-profit hash rate for the given revenues."""
    revenues = mining_revenues(subsidy, fees, price)
    return revenues * efficiency_at(params, t) / (params.energy_price * SECONDS_PER_DAY)
