import math

import numpy as np
import pytest

from hashpeak.calibration import (CalibrationError, CalibrationSpec, Objective, calibrate,
                                  compare_fits, golden_section, nelder_mead, objective)
from hashpeak.dynamics import Prepared, simulate
from hashpeak.econ import MiningParams
from hashpeak.series import ExogenousSeries


def synthetic(price, fees, knots, regimes):
    traj = simulate(MiningParams(adjustment_regimes=regimes), price, fees, 4100)
    return ExogenousSeries("synthetic", "GH/s", knots.days, traj.at(knots.days))


@pytest.fixture(scope="module")
def syn800(price, fees, hashrate):
    return synthetic(price, fees, hashrate, ((math.inf, 800.0),))


@pytest.fixture(scope="module")
def syn_two(price, fees, hashrate):
    return synthetic(price, fees, hashrate, ((3777.0, 1482.0), (math.inf, 264.0)))


def test_objective_zero_for_identical(price, fees, syn800):
    for kind in ("rmse", "log_rmse"):
        assert objective(((math.inf, 800.0),), syn800, price, fees, kind=kind) == 0


def test_objective_decade_offset(price, fees, syn800):
    tenth = ExogenousSeries("x", "GH/s", syn800.days, syn800.values / 10)
    val = objective(((math.inf, 800.0),), tenth, price, fees, kind="log_rmse")
    assert val == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["rmse", "log_rmse"])
def test_objective_minimised_at_generating_tau(price, fees, syn800, kind):
    vals = [objective(((math.inf, tau),), syn800, price, fees, kind=kind)
            for tau in (700, 760, 800, 840, 900)]
    assert np.argmin(vals) == 2


def test_objective_ignores_knot_order(price, fees, syn800, rng):
    pts = np.array(syn800.points())
    shuffled = pts[rng.permutation(len(pts))]
    regimes = ((math.inf, 1000.0),)
    for kind in ("rmse", "log_rmse"):
        assert objective(regimes, shuffled, price, fees, kind=kind) == \
            objective(regimes, syn800, price, fees, kind=kind)


def test_objective_subsampling_stable(price, fees, syn800):
    half = ExogenousSeries("h", "GH/s", syn800.days[::2], syn800.values[::2])
    for kind in ("rmse", "log_rmse"):
        full = objective(((math.inf, 1000.0),), syn800, price, fees, kind=kind)
        sub = objective(((math.inf, 1000.0),), half, price, fees, kind=kind)
        assert abs(sub - full) < 0.1 * full


def test_objective_empty_window(price, fees, syn800):
    prepared = Prepared(MiningParams(), price, fees, 4100)
    with pytest.raises(CalibrationError, match="no historical knots"):
        Objective(prepared, syn800, window=(4100.5, 5000))


def test_golden_section_quadratic():
    x, fx = golden_section(lambda x: (x - 123.4) ** 2, 10, 5000, tol=1.0)
    assert abs(x - 123.4) < 1.0


def test_nelder_mead_rosenbrock():
    def rosen(z):
        return (1 - z[0]) ** 2 + 100 * (z[1] - z[0] ** 2) ** 2
    x, fx, ok = nelder_mead(rosen, [-1.2, 1.0], [0.5, 0.5], [-5, -5], [5, 5],
                            ftol=1e-12, xtol=1e-10, max_iter=2000)
    assert ok and np.allclose(x, [1, 1], atol=1e-4)


def test_nelder_mead_respects_bounds():
    x, fx, _ = nelder_mead(lambda z: (z[0] + 3) ** 2 + z[1] ** 2, [1, 1], [0.5, 0.5],
                           [0, -1], [2, 1])
    assert x[0] == 0 and abs(x[1]) < 1e-2


@pytest.mark.parametrize("kind", ["rmse", "log_rmse"])
def test_recover_single(price, fees, syn800, kind):
    r = calibrate(CalibrationSpec(mode="single", objective=kind), price, fees, syn800)
    assert r.taus[0][1] == pytest.approx(800, rel=0.01)
    assert r.converged and r.evaluations > 0
    assert 10 <= r.taus[0][1] <= 5000 and r.objective_value >= 0


@pytest.mark.parametrize("kind", ["rmse", "log_rmse"])
def test_recover_two_regime(price, fees, syn_two, kind):
    r = calibrate(CalibrationSpec(mode="two-regime", objective=kind), price, fees, syn_two)
    (b, tau1), (_, tau2) = r.taus
    assert b == 3777
    assert tau1 == pytest.approx(1482, rel=0.02)
    assert tau2 == pytest.approx(264, rel=0.02)


def test_free_break_finds_the_break(price, fees, syn_two):
    r = calibrate(CalibrationSpec(mode="two_regime_free_break"), price, fees, syn_two)
    (b, tau1), (_, tau2) = r.taus
    assert b == pytest.approx(3777, rel=0.02)
    assert tau2 == pytest.approx(264, rel=0.05)
    assert 600 <= b <= 4000


def test_calibrate_is_deterministic(price, fees, syn_two):
    spec = CalibrationSpec(mode="two_regime")
    a = calibrate(spec, price, fees, syn_two)
    b = calibrate(spec, price, fees, syn_two)
    assert a.taus == b.taus and a.objective_value == b.objective_value
    assert a.evaluations == b.evaluations


def test_non_finite_grid_is_an_error(price, fees, hashrate):
    bad = [(d, math.inf) for d in hashrate.days]
    with pytest.raises(CalibrationError, match="non-finite"):
        calibrate(CalibrationSpec(mode="two_regime"), price, fees, bad)


def test_spec_validation():
    with pytest.raises(CalibrationError):
        CalibrationSpec(mode="three")
    with pytest.raises(CalibrationError):
        CalibrationSpec(search_bounds=(100, 10))
    with pytest.raises(CalibrationError):
        CalibrationSpec(objective="mae")


def test_result_report_shape(price, fees, syn800):
    r = calibrate(CalibrationSpec(), price, fees, syn800)
    d = r.to_dict()
    assert set(d) >= {"mode", "taus", "break_day", "objective", "evaluations"}
    assert d["taus"][0][0] is None and d["break_day"] is None


def test_compare_identical_is_not_meaningful(price, fees, syn800):
    r = calibrate(CalibrationSpec(), price, fees, syn800)
    rep = compare_fits(r, r)
    assert rep["single"]["objective"] == rep["two"]["objective"]
    assert not rep["two_strictly_better"] and not rep["meaningful"]


@pytest.mark.parametrize("kind", ["rmse", "log_rmse"])
def test_compare_on_single_tau_data_not_meaningful(price, fees, syn800, kind):
    single = calibrate(CalibrationSpec(objective=kind), price, fees, syn800)
    two = calibrate(CalibrationSpec(mode="two_regime", objective=kind), price, fees, syn800)
    rep = compare_fits(single, two)
    assert rep["improvement"] < 0.01
    assert rep["verdict"] == "not meaningful"
    assert len(rep["residuals_two"]["day"]) == len(syn800)


def test_compare_on_historical_data(price, fees, hashrate):
    single = calibrate(CalibrationSpec(), price, fees, hashrate)
    two = calibrate(CalibrationSpec(mode="two_regime"), price, fees, hashrate)
    rep = compare_fits(single, two)
    assert rep["two_strictly_better"] and rep["meaningful"]
