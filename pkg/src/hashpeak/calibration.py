"""Fit the hash-rate adjustment time(s) to a historical hash-rate series.

Single-delay fits use a golden-section search; multi-regime fits start from
a coarse log-spaced grid and refine the best grid point (the best three when
the break day is free) with Nelder-Mead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Prepared, Trajectory
from .econ import MiningParams
from .series import ExogenousSeries

MODES = ("single", "two_regime", "two_regime_free_break")
OBJECTIVES = ("rmse", "log_rmse")
LOG_FLOOR = 1e-12  # GH/s
GOLDEN = (math.sqrt(5) - 1) / 2
MEANINGFUL_GAIN = 0.01


class CalibrationError(ValueError):
    pass


def normalize_mode(mode: str) -> str:
    m = mode.replace("-", "_")
    if m not in MODES:
        raise CalibrationError(f"unknown mode {mode!r}; expected one of {MODES}")
    return m


@dataclass(frozen=True)
class CalibrationSpec:
    mode: str = "single"
    break_day: float = 3777.0
    search_bounds: tuple = (10.0, 5000.0)
    fit_window: tuple = (0.0, 4100.0)
    objective: str = "rmse"
    break_bounds: tuple = (600.0, 4000.0)
    max_iter: int = 500
    ftol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "mode", normalize_mode(self.mode))
        lo, hi = self.search_bounds
        if not 0 < lo < hi:
            raise CalibrationError(f"bad search bounds {self.search_bounds}")
        w0, w1 = self.fit_window
        if not w0 < w1:
            raise CalibrationError(f"bad fit window {self.fit_window}")
        if self.objective not in OBJECTIVES:
            raise CalibrationError(f"unknown objective {self.objective!r}")


@dataclass
class CalibrationResult:
    mode: str
    taus: list  # [(until_day, tau), ...], last until_day is inf
    objective_value: float
    evaluations: int
    converged: bool
    objective: str = "rmse"
    trajectory: Trajectory | None = field(default=None, repr=False)
    residual_days: np.ndarray | None = field(default=None, repr=False)
    residuals: np.ndarray | None = field(default=None, repr=False)

    @property
    def break_day(self):
        return self.taus[0][0] if len(self.taus) > 1 else None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "objective_kind": self.objective,
            "taus": [[None if math.isinf(u) else u, tau] for u, tau in self.taus],
            "break_day": self.break_day,
            "objective": self.objective_value,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


def _knots(historical):
    if isinstance(historical, ExogenousSeries):
        days, values = historical.days, historical.values
    else:
        arr = np.asarray(historical, dtype=float)
        days, values = arr[:, 0], arr[:, 1]
    order = np.argsort(days, kind="stable")
    return days[order], values[order]


class Objective:
    """Fit error of the model against historical knots inside ``window``."""

    def __init__(self, prepared: Prepared, historical, window=(0.0, 4100.0),
                 kind="rmse"):
        if kind not in OBJECTIVES:
            raise CalibrationError(f"unknown objective {kind!r}")
        days, values = _knots(historical)
        t_max = prepared.t[-1]
        m = (days >= window[0]) & (days <= min(window[1], t_max))
        if not m.any():
            raise CalibrationError(f"no historical knots inside window {window}")
        self.prepared = prepared
        self.kind = kind
        self.days = days[m]
        self.values = values[m]
        self._log_values = np.log10(np.maximum(self.values, LOG_FLOOR))
        self.evaluations = 0

    def residuals(self, traj: Trajectory) -> np.ndarray:
        model = traj.at(self.days)
        if self.kind == "log_rmse":
            return np.log10(np.maximum(model, LOG_FLOOR)) - self._log_values
        return model - self.values

    def __call__(self, regimes) -> float:
        self.evaluations += 1
        traj = self.prepared.run(regimes, with_warnings=False)
        r = self.residuals(traj)
        return float(np.sqrt(np.mean(r * r)))

    def data_scale(self) -> float:
        return float(np.sqrt(np.mean(self.values ** 2)))


def objective(regimes, historical, price, fees, params: MiningParams | None = None,
              window=(0.0, 4100.0), kind="rmse") -> float:
    """RMSE (linear or log10) between model and historical hash rate at the knots."""
    params = params or MiningParams()
    t_end = min(window[1], price.last_day, fees.last_day)
    t_end = math.floor(t_end / params.dt) * params.dt
    return Objective(Prepared(params, price, fees, t_end), historical, window, kind)(regimes)


def golden_section(f, lo, hi, tol=1.0):
    """Minimise a unimodal ``f`` on [lo, hi] to a bracket narrower than ``tol``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return x, fx


def nelder_mead(f, x0, steps, lower, upper, ftol=1e-6, xtol=1e-4, max_iter=500):
    """Box-clipped Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink 0.5).

    Stops when the spread of objective values over the simplex falls below
    ``ftol * max(1, |f_best|)``, when every vertex lies within ``xtol`` of the
    best one, or after ``max_iter`` iterations. Returns (x, fx, converged).

    Clipping can flatten the simplex against a bound, so after convergence
    the search restarts from the best point with a fresh simplex until a
    restart no longer improves on it.
    """
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    x, fx, ok, used = _nm_pass(f, x0, steps, lower, upper, ftol, xtol, max_iter)
    while ok and used < max_iter:
        x2, f2, ok2, k = _nm_pass(f, x, steps, lower, upper, ftol, xtol, max_iter - used)
        used += k
        if not f2 < fx - ftol * max(1.0, abs(fx)):
            break
        x, fx, ok = x2, f2, ok2
    return x, fx, ok


def _nm_pass(f, x0, steps, lower, upper, ftol, xtol, max_iter):
    def clip(x):
        return np.minimum(np.maximum(x, lower), upper)

    x0 = clip(np.asarray(x0, float))
    n = len(x0)
    simplex = [x0]
    for i in range(n):
        x = x0.copy()
        x[i] += steps[i]
        if clip(x)[i] == x0[i]:
            x[i] = x0[i] - steps[i]
        simplex.append(clip(x))
    fs = [f(x) for x in simplex]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        order = np.argsort(fs, kind="stable")
        simplex = [simplex[i] for i in order]
        fs = [fs[i] for i in order]
        spread = fs[-1] - fs[0]
        size = max(np.max(np.abs(x - simplex[0])) for x in simplex[1:])
        if spread <= ftol * max(1.0, abs(fs[0])) or size <= xtol:
            converged = True
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = clip(centroid + (centroid - worst))
        fr = f(xr)
        if fr < fs[0]:
            xe = clip(centroid + 2.0 * (centroid - worst))
            fe = f(xe)
            simplex[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = clip(centroid + 0.5 * (xr - centroid))
            fc = f(xc)
            accept = fc <= fr
        else:
            xc = clip(centroid + 0.5 * (worst - centroid))
            fc = f(xc)
            accept = fc < fs[-1]
        if accept:
            simplex[-1], fs[-1] = xc, fc
            continue
        best = simplex[0]
        simplex = [best] + [clip(best + 0.5 * (x - best)) for x in simplex[1:]]
        fs = [fs[0]] + [f(x) for x in simplex[1:]]
    i = int(np.argmin(fs))
    return simplex[i], fs[i], converged, it


def _regimes(mode, x, break_day):
    if mode == "single":
        return ((math.inf, float(x[0])),)
    b = break_day if mode == "two_regime" else float(x[2])
    return ((b, float(x[0])), (math.inf, float(x[1])))


def calibrate(spec: CalibrationSpec, price: ExogenousSeries, fees: ExogenousSeries,
              historical, params: MiningParams | None = None) -> CalibrationResult:
    """Fit adjustment time(s) per ``spec``; deterministic for given inputs."""
    params = params or MiningParams()
    lo, hi = spec.search_bounds
    if lo <= params.dt:
        raise CalibrationError(f"tau lower bound {lo} must exceed dt={params.dt}")
    w0, w1 = spec.fit_window
    for s in (price, fees):
        if not s.covers(0.0, w1):
            raise CalibrationError(f"{s.name} does not cover [0, {w1}]")
    t_end = math.ceil(w1 / params.dt) * params.dt
    if t_end > min(price.last_day, fees.last_day):
        t_end = math.floor(w1 / params.dt) * params.dt
    obj = Objective(Prepared(params, price, fees, t_end), historical, spec.fit_window,
                    spec.objective)
    mode = spec.mode

    if mode == "single":
        tau, fx = golden_section(lambda tau: obj(((math.inf, tau),)), lo, hi, tol=1.0)
        x, converged = np.array([tau]), True
    else:
        # search taus in log space, break day in thousands of days
        grid = np.log(np.geomspace(lo, hi, 5))
        if mode == "two_regime":
            cands = [np.array([a, b]) for a in grid for b in grid]
        else:
            breaks = np.linspace(*spec.break_bounds, 5) / 1000.0
            cands = [np.array([a, b, c]) for a in grid for b in grid for c in breaks]

        def f(z):
            taus = np.exp(z[:2])
            x = taus if mode == "two_regime" else np.append(taus, z[2] * 1000.0)
            val = obj(_regimes(mode, x, spec.break_day))
            return val if math.isfinite(val) else math.inf

        scores = [f(z) for z in cands]
        if not any(math.isfinite(s) for s in scores):
            raise CalibrationError("objective is non-finite on the entire grid")
        # the free break day makes the surface multi-modal: restart from the top 3
        starts = 1 if mode == "two_regime" else 3
        order = np.argsort(scores, kind="stable")[:starts]
        lower = [math.log(lo)] * 2
        upper = [math.log(hi)] * 2
        steps = [0.5, 0.5]
        if mode == "two_regime_free_break":
            lower.append(spec.break_bounds[0] / 1000.0)
            upper.append(spec.break_bounds[1] / 1000.0)
            steps.append(0.2)
        best = None
        for i in order:
            run = nelder_mead(f, cands[i], steps, lower, upper, ftol=spec.ftol,
                              xtol=1e-6, max_iter=spec.max_iter)
            if best is None or run[1] < best[1]:
                best = run
        z, fx, converged = best
        x = np.exp(z[:2]) if mode == "two_regime" else np.append(np.exp(z[:2]), z[2] * 1000.0)

    regimes = _regimes(mode, x, spec.break_day)
    traj = obj.prepared.run(regimes)
    return CalibrationResult(
        mode=mode, taus=[tuple(r) for r in regimes], objective_value=float(fx),
        evaluations=obj.evaluations, converged=bool(converged), objective=spec.objective,
        trajectory=traj, residual_days=obj.days.copy(), residuals=obj.residuals(traj),
        )


def improvement(single: float, other: float, kind: str, scale: float = 1.0) -> float:
    """Relative fit gain of ``other`` over ``single``.

    For log10 RMSE this is the reduction of the geometric-mean error factor;
    for linear RMSE the reduction as a fraction of the data's RMS level.
    """
    if kind == "log_rmse":
        return 10.0 ** (single - other) - 1.0
    return (single - other) / scale if scale > 0 else 0.0


def compare_fits(result_single: CalibrationResult, result_two: CalibrationResult,
                 data_scale: float | None = None) -> dict:
    """Report whether the multi-regime fit beats the single-delay fit meaningfully."""
    if result_single.objective != result_two.objective:
        raise CalibrationError("fits use different objectives")
    kind = result_single.objective
    if data_scale is None and kind == "rmse":
        r = result_single
        data = r.trajectory.at(r.residual_days) - r.residuals
        data_scale = float(np.sqrt(np.mean(data ** 2)))
    gain = improvement(result_single.objective_value, result_two.objective_value,
                       kind, data_scale or 1.0)
    better = result_two.objective_value < result_single.objective_value
    return {
        "objective_kind": kind,
        "single": result_single.to_dict(),
        "two": result_two.to_dict(),
        "two_strictly_better": bool(better),
        "improvement": gain,
        "meaningful": bool(better and gain >= MEANINGFUL_GAIN),
        "verdict": "improved" if better and gain >= MEANINGFUL_GAIN else "not meaningful",
        "residuals_single": {"day": result_single.residual_days.tolist(),
                             "residual": result_single.residuals.tolist()},
        "residuals_two": {"day": result_two.residual_days.tolist(),
                          "residual": result_two.residuals.tolist()},
    }
