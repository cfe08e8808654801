"""Exogenous day-indexed time series: CSV I/O, interpolation, chart fetching."""
from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import httpx
import numpy as np

log = logging.getLogger(__name__)

EPOCH = dt.date(2009, 1, 3)
EPOCH_UNIX = int(dt.datetime(2009, 1, 3, tzinfo=dt.timezone.utc).timestamp())
SECONDS_PER_DAY = 86_400

CHARTS = {
    "market-price": "USD/BTC",
    "transaction-fees": "BTC/day",
    "hash-rate": "GH/s",
}
DEFAULT_CHART_BASE = "https://api.blockchain.info/charts"
CHART_BASE_ENV = "HASHPEAK_CHART_BASE"


class SeriesError(ValueError):
    """Raised for malformed, non-monotone or out-of-range series data."""


@dataclass(frozen=True)
class ExogenousSeries:
    """Piecewise-linear series of (day, value) knots; day 0 is 2009-01-03 UTC."""

    name: str
    unit: str
    days: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        days = np.array(self.days, dtype=float)
        values = np.array(self.values, dtype=float)
        if days.ndim != 1 or days.shape != values.shape:
            raise SeriesError(f"{self.name}: days and values must be 1-d and equal length")
        if len(days) < 2:
            raise SeriesError(f"{self.name}: at least 2 points required, got {len(days)}")
        if not (np.all(np.isfinite(days)) and np.all(np.isfinite(values))):
            raise SeriesError(f"{self.name}: non-finite day or value")
        bad = np.nonzero(np.diff(days) <= 0)[0]
        if len(bad):
            i = bad[0]
            raise SeriesError(
                f"{self.name}: days must be strictly increasing "
                f"(day {days[i + 1]!r} follows {days[i]!r})")
        if np.any(values < 0):
            raise SeriesError(f"{self.name}: negative value at day {days[values < 0][0]!r}")
        days.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "days", days)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_points(cls, name, unit, points):
        points = list(points)
        return cls(name, unit, [p[0] for p in points], [p[1] for p in points])

    @property
    def first_day(self) -> float:
        return float(self.days[0])

    @property
    def last_day(self) -> float:
        return float(self.days[-1])

    def __len__(self):
        return len(self.days)

    def points(self):
        return list(zip(self.days.tolist(), self.values.tolist()))

    def covers(self, t0, t1) -> bool:
        return self.first_day <= t0 and t1 <= self.last_day

    def value_at(self, t: float) -> float:
        return value_at(self, t)

    def values_at(self, t) -> np.ndarray:
        """Vectorised :func:`value_at`; raises if any ``t`` is out of range."""
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < self.first_day or t.max() > self.last_day):
            raise SeriesError(
                f"{self.name}: lookup range [{t.min()!r}, {t.max()!r}] outside "
                f"[{self.first_day!r}, {self.last_day!r}]")
        return np.interp(t, self.days, self.values)

    def restrict(self, t0, t1) -> "ExogenousSeries":
        """Knots within [t0, t1], with interpolated end knots added if needed."""
        t0 = max(t0, self.first_day)
        t1 = min(t1, self.last_day)
        inner = (self.days > t0) & (self.days < t1)
        days = np.concatenate([[t0], self.days[inner], [t1]])
        return ExogenousSeries(self.name, self.unit, days, self.values_at(days))


def value_at(series: ExogenousSeries, t: float) -> float:
    """Linear interpolation between bracketing knots; exact at knots, no extrapolation."""
    if not series.first_day <= t <= series.last_day:
        raise SeriesError(
            f"{series.name}: day {t!r} outside [{series.first_day!r}, {series.last_day!r}]")
    # np.interp keeps scalar and vectorised lookups bit-identical
    return float(np.interp(t, series.days, series.values))


def date_to_day(date: dt.date) -> int:
    return (date - EPOCH).days


def day_to_date(day: float) -> dt.date:
    return EPOCH + dt.timedelta(days=int(np.floor(day)))


def _parse_key(text):
    """Return (day, is_date) for a CSV key cell."""
    text = text.strip()
    try:
        return float(text), False
    except ValueError:
        pass
    return float(date_to_day(dt.date.fromisoformat(text))), True


def load_csv(path, unit, name=None) -> ExogenousSeries:
    """Read ``day,value`` or ``YYYY-MM-DD,value`` rows (header optional).

    Mixing date rows and day rows in one file is rejected.
    """
    path = Path(path)
    name = name or path.stem
    days, values = [], []
    kind = None
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and row[0].strip().lower() in ("day", "date"):
                continue
            if len(row) != 2:
                raise SeriesError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                day, is_date = _parse_key(row[0])
                value = float(row[1])
            except ValueError as exc:
                raise SeriesError(f"{path}:{lineno}: malformed row {row!r}") from exc
            if kind is None:
                kind = is_date
            elif kind != is_date:
                raise SeriesError(f"{path}:{lineno}: mixed date and day rows")
            if days and day <= days[-1]:
                what = "duplicate" if day == days[-1] else "non-monotone"
                raise SeriesError(f"{path}:{lineno}: {what} day {day!r}")
            if value < 0:
                raise SeriesError(f"{path}:{lineno}: negative value {value!r}")
            days.append(day)
            values.append(value)
    return ExogenousSeries(name, unit, days, values)


def write_csv(series: ExogenousSeries, path) -> Path:
    """Write ``day,value`` rows at round-trip precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "value"])
        for d, v in zip(series.days.tolist(), series.values.tolist()):
            w.writerow([repr(d), repr(v)])
    return path


def splice(historical: ExogenousSeries, future: ExogenousSeries | None) -> ExogenousSeries:
    """Append ``future`` after ``historical``; historical wins at a shared boundary day."""
    if future is None or len(future.days) == 0:
        return historical
    if future.first_day < historical.last_day:
        raise SeriesError(
            f"future series starts at day {future.first_day!r}, before historical "
            f"end {historical.last_day!r}")
    keep = future.days > historical.last_day
    return ExogenousSeries(
        historical.name, historical.unit,
        np.concatenate([historical.days, future.days[keep]]),
        np.concatenate([historical.values, future.values[keep]]))


def bundled(chart_name) -> ExogenousSeries:
    """Weekly down-sampled fixture shipped with the package (days 0..4100)."""
    if chart_name not in CHARTS:
        raise SeriesError(f"unknown chart {chart_name!r}; expected one of {sorted(CHARTS)}")
    ref = resources.files("hashpeak") / "data" / f"{chart_name}.csv"
    with resources.as_file(ref) as path:
        return load_csv(path, CHARTS[chart_name], name=chart_name)


def parse_chart_json(payload, chart_name) -> ExogenousSeries:
    """Convert a ``{"values": [{"x": unix_s, "y": v}, ...]}`` document to a series."""
    try:
        doc = json.loads(payload) if isinstance(payload, (str, bytes)) else payload
        points = [(float(p["x"]), float(p["y"])) for p in doc["values"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise SeriesError(f"{chart_name}: malformed chart payload ({exc})") from exc
    scale = 1.0
    # the provider reports hash rate in TH/s nowadays
    if chart_name == "hash-rate" and "TH/s" in str(doc.get("unit", "")):
        scale = 1e3
    return ExogenousSeries.from_points(
        chart_name, CHARTS.get(chart_name, str(doc.get("unit", ""))),
        [((x - EPOCH_UNIX) / SECONDS_PER_DAY, max(y, 0.0) * scale) for x, y in points])


def fetch_chart(chart_name, cache_dir, transport=None, timeout=30.0) -> ExogenousSeries:
    """Fetch a chart from the provider, caching it as ``<cache_dir>/<chart_name>.csv``.

    A cache hit never touches the network. ``transport`` is passed through to
    :class:`httpx.Client` so tests can stub the endpoint.
    """
    if chart_name not in CHARTS:
        raise SeriesError(f"unknown chart {chart_name!r}; expected one of {sorted(CHARTS)}")
    cache = Path(cache_dir) / f"{chart_name}.csv"
    if cache.exists():
        log.info("cache hit %s", cache)
        return load_csv(cache, CHARTS[chart_name], name=chart_name)

    base = os.environ.get(CHART_BASE_ENV, DEFAULT_CHART_BASE).rstrip("/")
    url = f"{base}/{chart_name}"
    try:
        with httpx.Client(transport=transport, timeout=timeout) as client:
            resp = client.get(url, params={"timespan": "all", "format": "json"})
            resp.raise_for_status()
    except httpx.HTTPError as exc:
        raise SeriesError(f"fetching {url} failed and no cache at {cache}: {exc}") from exc
    series = parse_chart_json(resp.content, chart_name)
    write_csv(series, cache)
    return series
