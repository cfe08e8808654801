"""Command-line front end: ``hashpeak simulate|calibrate|project|sanity|fetch``.

Exit codes: 0 success, 1 usage/config/data error, 2 invariant failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, coins
from .calibration import (MODES, OBJECTIVES, CalibrationError, CalibrationSpec,
                          calibrate, compare_fits)
from .dynamics import simulate
from .econ import MiningParams, ParamsError
from .scenario import ScenarioSpec, project, summarize
from .series import CHARTS, SeriesError, bundled, fetch_chart, load_csv

log = logging.getLogger("hashpeak")

DATA_KEYS = {"market-price": "price_csv", "transaction-fees": "fees_csv",
             "hash-rate": "hashrate_csv"}


class UsageError(Exception):
    pass


class InvariantFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(x) for x in text.replace(":", ",").split(",")]


def parse_regimes(text):
    """``"1112"`` or ``"3777:1482,inf:264"`` -> ((until, tau), ...)."""
    out = []
    for part in text.split(","):
        if ":" in part:
            until, tau = part.split(":")
            out.append((float(until), float(tau)))
        else:
            out.append((math.inf, float(part)))
    return tuple(out)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, help="output directory (default: out)")
    common.add_argument("--dt", type=float, help="integration step in days")
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--price", dest="price_csv", type=Path, help="BTC price CSV (USD/BTC)")
    data.add_argument("--fees", dest="fees_csv", type=Path, help="fees CSV (BTC/day)")
    data.add_argument("--hashrate", dest="hashrate_csv", type=Path, help="hash-rate CSV (GH/s)")
    data.add_argument("--fetch", action="store_true", default=None,
                      help="use provider charts (cached) instead of bundled fixtures")
    data.add_argument("--cache-dir", type=Path, help="chart cache directory")
    data.add_argument("--regimes", type=parse_regimes,
                      help='adjustment times, e.g. "1112" or "3777:1482,inf:264"')

    p = _Parser(prog="hashpeak", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"hashpeak {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common, data], help="run the historical model")
    s.add_argument("--t-end", type=float, help="last day (default 4100)")

    c = sub.add_parser("calibrate", parents=[common, data], help="fit adjustment time(s)")
    c.add_argument("--mode", choices=[m.replace("_", "-") for m in MODES] + list(MODES[1:]),
                   metavar="{" + ",".join(m.replace("_", "-") for m in MODES) + "}")
    c.add_argument("--break-day", type=float)
    c.add_argument("--window", type=_floats, metavar="T0,T1")
    c.add_argument("--objective", choices=OBJECTIVES)

    j = sub.add_parser("project", parents=[common, data], help="post-halving projection")
    j.add_argument("--seed", type=int)
    j.add_argument("--sd-price", type=float)
    j.add_argument("--sd-fees", type=float)
    j.add_argument("--mean-price", type=float)
    j.add_argument("--mean-fees", type=float)
    j.add_argument("--start", type=float, help="projection start day (default 4100)")
    j.add_argument("--horizon", type=float, help="last projected day (default 7500)")

    k = sub.add_parser("sanity", parents=[common], help="coin-supply sanity checks")
    k.add_argument("--t-end", type=float, help="last day (default 4100)")
    k.add_argument("--heights", type=Path, help="observed blockchain height CSV to compare")

    f = sub.add_parser("fetch", parents=[common], help="download and cache provider charts")
    f.add_argument("--cache-dir", type=Path)
    return p


def load_config(args) -> dict:
    """Config file values overlaid with every flag that was given."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError(f"config {args.config} must be a JSON object")
    cfg.setdefault("params", {})
    cfg.setdefault("calibration", {})
    cfg.setdefault("scenario", {})
    flags = vars(args)
    for key in ("out", "price_csv", "fees_csv", "hashrate_csv", "cache_dir", "fetch",
                "t_end", "heights"):
        if flags.get(key) is not None:
            cfg[key] = str(flags[key]) if isinstance(flags[key], Path) else flags[key]
    if flags.get("dt") is not None:
        cfg["params"]["dt"] = flags["dt"]
    if flags.get("regimes") is not None:
        cfg["params"]["adjustment_regimes"] = [
            [None if math.isinf(u) else u, tau] for u, tau in flags["regimes"]]
    for flag, key in (("mode", "mode"), ("break_day", "break_day"),
                      ("window", "fit_window"), ("objective", "objective")):
        if flags.get(flag) is not None:
            cfg["calibration"][key] = flags[flag]
    for flag, key in (("seed", "seed"), ("sd_price", "price_sd"), ("sd_fees", "fees_sd"),
                      ("mean_price", "price_mean"), ("mean_fees", "fees_mean"),
                      ("start", "t_start"), ("horizon", "t_end")):
        if flags.get(flag) is not None:
            cfg["scenario"][key] = flags[flag]
    cfg.setdefault("out", "out")
    return cfg


def _params(cfg) -> MiningParams:
    try:
        return MiningParams.from_dict(cfg["params"])
    except (ParamsError, TypeError, ValueError, KeyError) as exc:
        raise UsageError(f"invalid params: {exc}") from exc


def _series(cfg, chart):
    """Series for ``chart`` from an explicit CSV, the fetch cache, or the bundled fixture."""
    path = cfg.get(DATA_KEYS[chart])
    if path:
        if not Path(path).is_file():
            raise UsageError(f"data file not found: {path}")
        return load_csv(path, CHARTS[chart], name=chart)
    if cfg.get("fetch"):
        return fetch_chart(chart, cfg.get("cache_dir", "data-cache"))
    return bundled(chart)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _manifest(out, command, cfg, params, extra=None):
    inputs = {}
    for key in DATA_KEYS.values():
        if cfg.get(key):
            inputs[key] = {"path": cfg[key], "sha256": _sha256(cfg[key])}
    doc = {"command": command, "version": __version__, "config": cfg,
           "params": params.to_dict(), "inputs": inputs}
    doc.update(extra or {})
    _write_json(out / "run.json", doc)


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg) -> int:
    params = _params(cfg)
    t_end = float(cfg.get("t_end", 4100.0))
    price, fees = _series(cfg, "market-price"), _series(cfg, "transaction-fees")
    traj = simulate(params, price, fees, t_end)
    out = _outdir(cfg)
    traj.to_csv(out / "trajectory.csv")
    _manifest(out, "simulate", cfg, params, {"warnings": traj.warnings})
    print(f"simulated days 0..{t_end:g} ({len(traj)} rows) -> {out / 'trajectory.csv'}")
    print(f"final hash rate {traj.hash_rate_ghs[-1]:.6g} GH/s, height {traj.height[-1]:.0f}")
    return 0


def cmd_calibrate(cfg) -> int:
    params = _params(cfg)
    c = dict(cfg["calibration"])
    if "fit_window" in c:
        if len(c["fit_window"]) != 2:
            raise UsageError("--window needs exactly two days T0,T1")
        c["fit_window"] = tuple(c["fit_window"])
    for key in ("search_bounds", "break_bounds"):
        if key in c:
            c[key] = tuple(c[key])
    try:
        spec = CalibrationSpec(**c)
    except (CalibrationError, TypeError) as exc:
        raise UsageError(f"invalid calibration settings: {exc}") from exc
    price, fees = _series(cfg, "market-price"), _series(cfg, "transaction-fees")
    hist = _series(cfg, "hash-rate")
    out = _outdir(cfg)

    main = calibrate(spec, price, fees, hist, params)
    other_mode = "two_regime" if spec.mode == "single" else "single"
    other = calibrate(CalibrationSpec(**{**c, "mode": other_mode}), price, fees, hist, params)
    single, multi = (main, other) if spec.mode == "single" else (other, main)
    report = main.to_dict()
    report["comparison"] = compare_fits(single, multi)
    _write_json(out / "fit_report.json", report)
    for r in (main, other):
        r.trajectory.to_csv(out / f"trajectory_{r.mode}.csv")
    _manifest(out, "calibrate", cfg, params)
    taus = ", ".join(f"{tau:.1f} d (until {u:g})" for u, tau in main.taus)
    print(f"{main.mode}: {taus}; {main.objective}={main.objective_value:.6g} "
          f"after {main.evaluations} evaluations")
    cmp_ = report["comparison"]
    print(f"two-regime vs single: improvement {cmp_['improvement']:.3%} ({cmp_['verdict']})")
    return 0


def cmd_project(cfg) -> int:
    params = _params(cfg)
    try:
        spec = ScenarioSpec(**cfg["scenario"])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid scenario settings: {exc}") from exc
    price, fees = _series(cfg, "market-price"), _series(cfg, "transaction-fees")
    traj = project(params, price, fees, spec)
    out = _outdir(cfg)
    traj.to_csv(out / "trajectory.csv")
    summary = summarize(traj, spec)
    _write_json(out / "summary.json", summary)
    _manifest(out, "project", cfg, params, {"seed": spec.seed, "generator": summary["generator"]})
    print(f"peak {summary['peak_hash_rate']:.4g} GH/s at day {summary['peak_day']:g}; "
          f"terminal {summary['terminal_hash_rate']:.4g} GH/s at day {spec.t_end:g}")
    return 0


def cmd_sanity(cfg) -> int:
    params = _params(cfg)
    t_end = float(cfg.get("t_end", 4100.0))
    days = np.arange(int(round(t_end / params.dt)) + 1) * params.dt
    coin = coins.CoinState()
    failures = []
    heights, circ = [], []
    for _ in days:
        heights.append(coin.height)
        circ.append(coin.circulating)
        if abs(coin.circulating + coin.remaining - coins.TOTAL_BTC) > 1e-6:
            failures.append(f"conservation broken at height {coin.height}")
        coin = coins.coin_step(coin, params.dt)
    heights, circ = np.array(heights), np.array(circ)
    expected = np.array([coins.supply_until(h) for h in heights])
    if np.max(np.abs(circ - expected)) > 1e-6:
        failures.append("circulating supply departs from the era-wise sum")
    print(f"height at day {t_end:g}: {heights[-1]:.0f} blocks "
          f"(target {coins.BLOCKS_PER_DAY * t_end:.0f})")
    if heights[-1] != coins.BLOCKS_PER_DAY * t_end:
        failures.append("height differs from 144 * t")
    b = coins.HALVING_INTERVAL / coins.BLOCKS_PER_DAY
    if b <= t_end:
        at_b = float(np.interp(b, days, circ))
        print(f"circulating at end of era 0 (day {b:.2f}): {at_b:,.2f} BTC")
        if abs(at_b - 10_500_000) > coins.BLOCKS_PER_DAY * 50 * params.dt:
            failures.append("era-0 checkpoint off by more than one step of creation")
    print(f"circulating at day {t_end:g}: {circ[-1]:,.8f} BTC")
    print(f"supply asymptote: {coins.circulating_asymptote():,.8f} BTC")
    if cfg.get("heights"):
        path = cfg["heights"]
        if not Path(path).is_file():
            raise UsageError(f"data file not found: {path}")
        real = load_csv(path, "blocks", name="height")
        m = (real.days >= 0) & (real.days <= t_end)
        model = coins.BLOCKS_PER_DAY * real.days[m]
        rel = np.abs(model - real.values[m]) / np.maximum(real.values[m], 1.0)
        print(f"model vs observed height: max relative deviation {rel.max():.2%}, "
              f"at day {t_end:g} model {heights[-1]:.0f} "
              f"observed {real.values_at([min(t_end, real.last_day)])[0]:.0f}")
    if failures:
        raise InvariantFailure("; ".join(failures))
    print("sanity: all invariants hold")
    return 0


def cmd_fetch(cfg) -> int:
    cache = Path(cfg.get("cache_dir", "data-cache"))
    for chart in CHARTS:
        s = fetch_chart(chart, cache)
        print(f"{chart}: {len(s)} points, days {s.first_day:.1f}..{s.last_day:.1f} "
              f"-> {cache / (chart + '.csv')}")
    return 0


COMMANDS = {"simulate": cmd_simulate, "calibrate": cmd_calibrate, "project": cmd_project,
            "sanity": cmd_sanity, "fetch": cmd_fetch}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except InvariantFailure as exc:
        print(f"hashpeak: invariant failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, SeriesError, CalibrationError, ParamsError, ValueError) as exc:
        print(f"hashpeak: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
