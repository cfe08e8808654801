"""Controlled coin supply: subsidy halving schedule, height and circulating stock."""
from __future__ import annotations

import math
from dataclasses import dataclass

TOTAL_BTC = 21_000_000.0
SATOSHI_PER_BTC = 100_000_000
INITIAL_SUBSIDY_SAT = 50 * SATOSHI_PER_BTC
HALVING_INTERVAL = 210_000
BLOCKS_PER_DAY = 144
LAST_ERA = 33  # floor(5e9 / 2**33) == 0


def block_creation_rate() -> int:
    """Target rate of one block per 10 minutes."""
    return BLOCKS_PER_DAY


def era_of(height: float) -> int:
    return int(math.floor(height / HALVING_INTERVAL))


def subsidy_sat(era: int) -> int:
    if era >= LAST_ERA:
        return 0
    return INITIAL_SUBSIDY_SAT >> era


def subsidy_at_height(height: float) -> float:
    """Block subsidy in BTC, floored to whole satoshis per era."""
    if height < 0:
        raise ValueError(f"height must be >= 0, got {height!r}")
    return subsidy_sat(era_of(height)) / SATOSHI_PER_BTC


def supply_sat_until(height: float) -> int | float:
    """Satoshis issued by blocks in [0, height); continuous in height."""
    era = min(era_of(height), LAST_ERA)
    total = sum(HALVING_INTERVAL * subsidy_sat(e) for e in range(era))
    return total + (height - era * HALVING_INTERVAL) * subsidy_sat(era)


def supply_until(height: float) -> float:
    """Circulating BTC after ``height`` blocks: era-wise closed-form sum."""
    return supply_sat_until(height) / SATOSHI_PER_BTC


def circulating_asymptote() -> float:
    """Exact supply cap under the satoshi-floored schedule, in BTC."""
    return sum(HALVING_INTERVAL * subsidy_sat(e) for e in range(LAST_ERA)) / SATOSHI_PER_BTC


@dataclass(frozen=True)
class CoinState:
    height: float = 0.0
    circulating: float = 0.0
    remaining: float = TOTAL_BTC


def coin_step(state: CoinState, dt: float) -> CoinState:
    """Advance the supply stocks by ``dt`` days at the target block rate.

    Creation over the step is the exact era-wise integral of the subsidy, so a
    halving inside the step is credited at the right blocks.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    h1 = state.height + BLOCKS_PER_DAY * dt
    creation = supply_until(h1) - supply_until(state.height)
    moved = min(creation, state.remaining)
    circulating = state.circulating + moved
    return CoinState(h1, circulating, (state.circulating + state.remaining) - circulating)


def halving_days(t_end: float) -> list[float]:
    """Model days (target-rate calendar) at which the era increments, up to ``t_end``."""
    out = []
    k = 1
    while k * HALVING_INTERVAL / BLOCKS_PER_DAY <= t_end:
        out.append(k * HALVING_INTERVAL / BLOCKS_PER_DAY)
        k += 1
    return out
