"""CSV ingestion and the machine-readable output files.

The series format is two columns with header ``t,value``: ``t`` runs
1, 2, ... consecutively and ``value`` is a decimal number, with an empty
field or ``NA`` marking a missing observation.  All numeric output uses
17 significant digits so files round-trip through a re-read without
precision loss.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .forecast import ForecastSummary, ValidationReport
from .model import TimeSeriesData

__all__ = [
    "DataFormatError",
    "load_series",
    "write_series",
    "write_forecast_csv",
    "write_histogram_csv",
    "write_validation_csv",
]

MISSING_TOKENS = {"", "NA"}


class DataFormatError(ValueError):
    """A series file violates the input contract."""


def _fmt(v: float) -> str:
    return "NA" if not math.isfinite(v) else f"{v:.17g}"


def load_series(path, period: int = 12, label: str | None = None) -> TimeSeriesData:
    """Parse a ``t,value`` CSV into a series.

    Rows must carry consecutive integer t starting at 1; a value of
    ``NA`` (or an empty field) marks that observation missing.  Errors
    name the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"{path}: no such file")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or all(not ln.strip() for ln in lines):
        raise DataFormatError(f"{path}: empty file")
    header = lines[0].strip()
    if [c.strip() for c in header.split(",")] != ["t", "value"]:
        raise DataFormatError(
            f"{path}: line 1: expected header 't,value', got {header!r}")
    values = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 2:
            raise DataFormatError(
                f"{path}: line {lineno}: expected two fields, got {len(parts)}")
        t_str, v_str = parts[0].strip(), parts[1].strip()
        try:
            t = int(t_str)
        except ValueError:
            raise DataFormatError(
                f"{path}: line {lineno}: time index {t_str!r} is not an integer"
            ) from None
        expected = len(values) + 1
        if t != expected:
            raise DataFormatError(
                f"{path}: line {lineno}: time index {t} is not consecutive "
                f"(expected {expected})")
        if v_str in MISSING_TOKENS:
            values.append(np.nan)
            continue
        try:
            values.append(float(v_str))
        except ValueError:
            raise DataFormatError(
                f"{path}: line {lineno}: cannot parse value {v_str!r}"
            ) from None
    if not values:
        raise DataFormatError(f"{path}: no data rows")
    try:
        return TimeSeriesData(
            np.array(values), period=period,
            label=label if label is not None else path.stem)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_series(data: TimeSeriesData, path) -> None:
    """Write a series in the same ``t,value`` format the loader reads."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,value\n")
        for i, v in enumerate(data.values, start=1):
            fh.write(f"{i},{_fmt(v)}\n")


def write_forecast_csv(summary: ForecastSummary, path) -> None:
    """Per-horizon point forecast and credible bounds: h,median,lower,upper."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("h,median,lower,upper\n")
        for h in range(summary.horizon):
            fh.write(f"{h + 1},{_fmt(summary.point[h])},"
                     f"{_fmt(summary.lower[h])},{_fmt(summary.upper[h])}\n")


def write_histogram_csv(paths: np.ndarray, destination, n_bins: int = 30) -> None:
    """Plot-ready per-horizon histogram of predictive draws.

    Columns h,bin_left,bin_right,count; counts at each horizon sum to the
    number of paths.
    """
    paths = np.asarray(paths)
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("h,bin_left,bin_right,count\n")
        for h in range(paths.shape[1]):
            counts, edges = np.histogram(paths[:, h], bins=n_bins)
            for i in range(n_bins):
                fh.write(f"{h + 1},{_fmt(edges[i])},{_fmt(edges[i + 1])},"
                         f"{counts[i]}\n")


def write_validation_csv(
    reports: dict[str, ValidationReport],
    destination,
) -> None:
    """Holdout scores, with side-by-side columns per model when comparing.

    One row per horizon step: the observed value, then for each named
    model its median, lower, upper, error and coverage flag.
    """
    if not reports:
        raise ValueError("no validation reports to write")
    names = list(reports)
    first = reports[names[0]]
    cols = ["h", "observed"]
    for nm in names:
        cols += [f"median_{nm}", f"lower_{nm}", f"upper_{nm}",
                 f"error_{nm}", f"covered_{nm}"]
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for h in range(first.horizon):
            row = [str(h + 1), _fmt(first.observed[h])]
            for nm in names:
                r = reports[nm]
                row += [_fmt(r.point[h]), _fmt(r.lower[h]), _fmt(r.upper[h]),
                        _fmt(r.errors[h]),
                        str(int(r.covered[h]))]
            fh.write(",".join(row) + "\n")
