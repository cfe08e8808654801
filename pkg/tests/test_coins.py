import pytest
from hypothesis import given
from hypothesis import strategies as st

from hashpeak import coins
from hashpeak.coins import CoinState, coin_step, subsidy_at_height


def oracle_subsidies(n_eras=41):
    """Satoshi subsidy per era by repeated integer halving."""
    out, s = [], 50 * 10**8
    for _ in range(n_eras):
        out.append(s)
        s //= 2
    return out


ORACLE = oracle_subsidies()


def oracle_supply_sat(height):
    """Block-by-block brute force: satoshis issued by blocks [0, height)."""
    total = 0
    for era, sub in enumerate(ORACLE):
        lo = era * 210_000
        if lo >= height:
            break
        total += sub * (min(height, lo + 210_000) - lo)
    return total


def test_oracle_frozen_values():
    assert ORACLE[32] == 1 and ORACLE[33] == 0
    assert sum(s * 210_000 for s in ORACLE) == 2_099_999_997_690_000


@pytest.mark.parametrize("height, btc", [
    (0, 50.0),
    (210_000, 25.0),
    (32 * 210_000, 1e-8),
    (33 * 210_000, 0.0),
    (40 * 210_000, 0.0),
    (209_999, 50.0),
])
def test_subsidy_examples(height, btc):
    assert subsidy_at_height(height) == btc


def test_subsidy_matches_oracle_every_era():
    for era in range(41):
        assert subsidy_at_height(era * 210_000) * 10**8 == pytest.approx(ORACLE[era], abs=0)
        assert coins.subsidy_sat(era) == ORACLE[era]


def test_successive_eras_halve_with_floor():
    for era in range(40):
        assert coins.subsidy_sat(era + 1) == coins.subsidy_sat(era) // 2


@given(st.floats(0, 1e8), st.floats(0, 1e8))
def test_subsidy_non_increasing(a, b):
    lo, hi = sorted((a, b))
    assert subsidy_at_height(lo) >= subsidy_at_height(hi)


def test_negative_height_rejected():
    with pytest.raises(ValueError):
        subsidy_at_height(-1)


def test_block_rate():
    assert coins.block_creation_rate() == 144
    assert coins.block_creation_rate() * 10 == 24 * 60


def test_asymptote():
    assert coins.circulating_asymptote() == 20_999_999.9769
    assert 20_999_999 < coins.circulating_asymptote() < 21_000_000
    assert coins.supply_until(210_000) == 10_500_000
    assert coins.supply_until(420_000) == 15_750_000


def test_first_step():
    s = coin_step(CoinState(0, 0, 21e6), 1)
    assert (s.height, s.circulating, s.remaining) == (144, 7200, 20_992_800)


def test_step_across_halving_credits_each_block_at_its_era():
    # 48 blocks at 50 then 96 at 25
    s = coin_step(CoinState(209_952, coins.supply_until(209_952), 21e6 - coins.supply_until(209_952)), 1)
    assert s.circulating - coins.supply_until(209_952) == 48 * 50 + 96 * 25


def test_exhausted_supply_stays_put():
    s = coin_step(CoinState(1e6, 21e6, 0.0), 1)
    assert s.circulating == 21e6 and s.remaining == 0.0


def test_dt_must_be_positive():
    with pytest.raises(ValueError):
        coin_step(CoinState(), 0)


@pytest.mark.parametrize("dt", [1.0, 0.5, 0.25])
def test_path_matches_brute_force_and_conserves(dt):
    s = CoinState()
    steps = int(7500 / dt)
    prev = s
    for k in range(steps):
        s = coin_step(s, dt)
        assert abs(s.circulating + s.remaining - 21e6) <= 1e-6
        assert s.circulating >= prev.circulating and s.remaining <= prev.remaining
        assert s.height > prev.height
        prev = s
    assert s.height == 144 * 7500
    assert s.circulating == pytest.approx(oracle_supply_sat(144 * 7500) / 1e8, abs=1e-6)


def test_day_4100():
    s = CoinState()
    for _ in range(4100):
        s = coin_step(s, 1.0)
    assert s.height == 590_400
    assert abs(s.circulating - oracle_supply_sat(590_400) / 1e8) <= 1e-6


def test_halving_days():
    days = coins.halving_days(7500)
    assert days[0] == pytest.approx(1458.3333333333333)
    assert days[2] == 4375
    assert len(days) == 5
