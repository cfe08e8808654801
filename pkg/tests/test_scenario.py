import math

import numpy as np
import pytest

from hashpeak.econ import MiningParams, equilibrium_hash_rate
from hashpeak.scenario import (ScenarioSpec, future_inputs, halving_days, pink_noise,
                               project, summarize)

N = 100_000


def lag_autocorr(x, lag):
    x = x - x.mean()
    return float(np.dot(x[:-lag], x[lag:]) / np.dot(x, x))


def test_zero_sd_is_constant():
    s = pink_noise(7300, 0, 28, 4100, 7500, seed=1)
    assert np.all(s.values == 7300)
    assert s.first_day == 4100 and s.last_day == 7500 and len(s) == 3401


@pytest.mark.parametrize("mean, sd", [(7300, 500), (30, 5)])
def test_noise_statistics(mean, sd):
    x = pink_noise(mean, sd, 28, 0, N, seed=7).values
    # ~N / (2 tau_c) independent samples
    assert abs(x.mean() - mean) <= 3 * sd / math.sqrt(N / 56)
    assert x.std() == pytest.approx(sd, rel=0.10)
    assert abs(lag_autocorr(x, 28) - math.exp(-1)) <= 0.05
    assert np.all(x >= 0)


def test_noise_floored_at_zero():
    x = pink_noise(1, 5, 28, 0, 5000, seed=3).values
    assert x.min() == 0 and np.all(x >= 0)


def test_noise_reproducible_and_seed_sensitive():
    a = pink_noise(30, 5, 28, 0, 1000, seed=42)
    b = pink_noise(30, 5, 28, 0, 1000, seed=42)
    c = pink_noise(30, 5, 28, 0, 1000, seed=43)
    assert a.values.tobytes() == b.values.tobytes()
    assert not np.array_equal(a.values, c.values)


@pytest.mark.parametrize("tau_c, dt", [(1.0, 1.0), (0.5, 1.0), (28, 0)])
def test_noise_rejects_bad_time_constants(tau_c, dt):
    with pytest.raises(ValueError):
        pink_noise(30, 5, tau_c, 0, 100, dt=dt)


def test_future_inputs_draw_price_first():
    spec = ScenarioSpec(seed=9)
    price, fees = future_inputs(spec)
    rng = np.random.default_rng(9)
    ref_price = pink_noise(7300, 500, 28, 4100, 7500, rng=rng)
    ref_fees = pink_noise(30, 5, 28, 4100, 7500, rng=rng)
    assert np.array_equal(price.values, ref_price.values)
    assert np.array_equal(fees.values, ref_fees.values)


def test_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(t_start=5000, t_end=4000)
    with pytest.raises(ValueError):
        ScenarioSpec(price_sd=-1)


def test_halving_calendar():
    days = halving_days(None, 7500)
    assert days == pytest.approx([1458.3333, 2916.6667, 4375, 5833.3333, 7291.6667], abs=1e-3)


@pytest.fixture(scope="module")
def flat_projection(price, fees):
    spec = ScenarioSpec(price_sd=0, fees_sd=0)
    traj = project(MiningParams(), price, fees, spec)
    return traj, summarize(traj, spec)


def test_projection_profit_flips_at_halving(flat_projection):
    traj, summary = flat_projection
    i = int(np.searchsorted(traj.t, 4375))
    assert traj.profit_usd[i - 1] > 0 and traj.profit_usd[i] < 0
    assert summary["profit_negative_after_halving"]["4375.0"] == 4375


def test_projection_peak_follows_halving(flat_projection):
    _, summary = flat_projection
    assert 4375 <= summary["peak_day"] <= 4375 + 2 * 264


def test_projection_era3_plateau(flat_projection):
    _, summary = flat_projection
    target = equilibrium_hash_rate(6.25, 30, 7300, MiningParams(), 4100)
    assert target == pytest.approx(5.66e10, rel=1e-3)
    era3 = next(e for e in summary["eras"] if e["era"] == 3)
    assert era3["end_hash_rate"] == pytest.approx(target, rel=0.01)


def test_projection_uses_history_up_to_start(flat_projection, price):
    traj, _ = flat_projection
    assert np.array_equal(traj.price[:4101], price.values_at(np.arange(4101.0)))
    assert np.all(traj.price[4101:] == 7300) and np.all(traj.fees[4101:] == 30)
    assert len(traj) == 7501


def test_projection_is_deterministic(price, fees):
    spec = ScenarioSpec(seed=42)
    a = project(MiningParams(), price, fees, spec)
    b = project(MiningParams(), price, fees, spec)
    assert a.hash_rate_ghs.tobytes() == b.hash_rate_ghs.tobytes()
    s = summarize(a, spec)
    assert s["seed"] == 42 and "PCG64" in s["generator"]
    assert s["observed_halving_dates"][:3] == ["2012-11-28", "2016-07-09", "2020-05-11"]


def test_projection_shortfall_sign_after_halving(flat_projection):
    traj, _ = flat_projection
    era3 = (traj.t >= 4375) & (traj.t < 5833.33)
    h_star = traj.hash_rate_ghs + traj.shortfall_ghs
    below = np.nonzero(era3 & (traj.hash_rate_ghs <= h_star))[0]
    # negative from the halving until H has decayed onto the new target
    first_below = below[0] if len(below) else np.nonzero(era3)[0][-1] + 1
    assert np.all(traj.shortfall_ghs[np.nonzero(era3)[0][0]:first_below] < 0)
    end = np.nonzero(era3)[0][-1]
    assert abs(traj.shortfall_ghs[end]) <= 0.01 * h_star[end]
