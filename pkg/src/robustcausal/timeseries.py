"""Core time-series containers, validation, preprocessing, and CSV I/O.

A :class:`TimeSeries` is a named 1-D float array sampled at a uniform step.
A :class:`Dataset` bundles several series observed on the same time axis.
Preprocessing is limited to the two operations the downstream estimators
expect: linear detrending and removal of a periodic (seasonal) mean cycle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    CsvFormatError,
    DuplicateName,
    InvalidConfig,
    LengthMismatch,
    NonFinite,
    TooShort,
)

__all__ = [
    "TimeSeries",
    "Dataset",
    "PreprocessSpec",
    "validate_dataset",
    "detrend_linear",
    "deseasonalize",
    "apply_preprocess",
    "read_dataset_csv",
    "write_dataset_csv",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A named, uniformly sampled sequence of float values."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise InvalidConfig(f"series {self.name!r} must be 1-D, got shape {values.shape}")
        if values.size < 1:
            raise TooShort(f"series {self.name!r} is empty")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class Dataset:
    """A collection of equally long series on a shared time axis.

    ``sampling_step`` is a free-form label ("month", "day", ...) carried
    through for provenance; no arithmetic depends on it.
    """

    series: tuple[TimeSeries, ...]
    sampling_step: str = ""

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.series)

    @property
    def length(self) -> int:
        return len(self.series[0]) if self.series else 0

    def get(self, name: str) -> TimeSeries:
        for s in self.series:
            if s.name == name:
                return s
        raise KeyError(name)

    def window(self, start: int, length: int) -> "Dataset":
        """Contiguous index window [start, start + length) of every series."""
        sliced = tuple(
            TimeSeries(s.name, s.values[start : start + length]) for s in self.series
        )
        return Dataset(sliced, self.sampling_step)

    def __iter__(self):
        return iter(self.series)


def validate_dataset(d: Dataset) -> Dataset:
    """Check dataset invariants and return the dataset unchanged.

    Raises
    ------
    DuplicateName
        if two series share a name.
    LengthMismatch
        if series lengths differ.
    NonFinite
        if any value is NaN or infinite.
    InvalidConfig
        if fewer than two series are present.
    """
    if len(d.series) < 2:
        raise InvalidConfig("a dataset needs at least 2 series")
    seen = set()
    for s in d.series:
        if s.name in seen:
            raise DuplicateName(f"duplicate series name {s.name!r}")
        seen.add(s.name)
    lengths = {len(s) for s in d.series}
    if len(lengths) != 1:
        raise LengthMismatch(f"series lengths differ: {sorted(lengths)}")
    for s in d.series:
        if not np.all(np.isfinite(s.values)):
            raise NonFinite(f"series {s.name!r} contains NaN or infinite values")
    return d


def detrend_linear(s: TimeSeries) -> TimeSeries:
    """Remove the least-squares straight line fitted against the sample index.

    The returned residual series has the same name and length and is exactly
    orthogonal to both the constant and the linear ramp, so applying the
    operation twice is a no-op up to float rounding.
    """
    n = len(s)
    if n < 2:
        raise TooShort(f"series {s.name!r}: need at least 2 points to detrend")
    i = np.arange(n, dtype=float)
    i_centered = i - i.mean()
    v = s.values
    slope = float(np.dot(i_centered, v - v.mean()) / np.dot(i_centered, i_centered))
    intercept = float(v.mean() - slope * i.mean())
    return TimeSeries(s.name, v - (intercept + slope * i))


def deseasonalize(s: TimeSeries, period: int) -> TimeSeries:
    """Subtract the mean of each phase class (indices equal mod ``period``).

    The final cycle may be incomplete; each phase mean is taken over however
    many samples that phase has. ``period=1`` degenerates to mean removal.
    """
    if period < 1:
        raise InvalidConfig(f"period must be >= 1, got {period}")
    n = len(s)
    if n < period:
        raise TooShort(
            f"series {s.name!r}: length {n} is shorter than period {period}"
        )
    out = s.values.copy()
    for phase in range(period):
        out[phase::period] -= out[phase::period].mean()
    return TimeSeries(s.name, out)


@dataclass(frozen=True)
class PreprocessSpec:
    """Which preprocessing steps to run, applied per variable.

    Detrending runs first, then seasonal-cycle removal.
    """

    detrend: bool = False
    deseasonalize: bool = False
    season_period: int = 12

    def __post_init__(self):
        if self.deseasonalize and self.season_period < 2:
            raise InvalidConfig(
                f"season_period must be >= 2 when deseasonalizing, got {self.season_period}"
            )


def apply_preprocess(d: Dataset, spec: PreprocessSpec) -> Dataset:
    """Apply the configured preprocessing steps to every series."""
    out = []
    for s in d.series:
        if spec.detrend:
            s = detrend_linear(s)
        if spec.deseasonalize:
            s = deseasonalize(s, spec.season_period)
        out.append(s)
    return Dataset(tuple(out), d.sampling_step)


def read_dataset_csv(path, sampling_step: str = "") -> Dataset:
    """Read a dataset from CSV: header row of names, one time step per row.

    Values use '.' as the decimal mark and ',' as the separator. Blank cells
    are an error. A leading timestamp column named "t" is ignored.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or all(h == "" for h in header):
        raise CsvFormatError(f"{path}: missing header row")
    skip_first = header and header[0] == "t"
    names = header[1:] if skip_first else header
    if not names:
        raise CsvFormatError(f"{path}: no variable columns")
    columns: list[list[float]] = [[] for _ in names]
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        cells = row[1:] if skip_first else row
        if len(cells) != len(names):
            raise CsvFormatError(
                f"{path}:{lineno}: expected {len(names)} value cells, got {len(cells)}"
            )
        for j, cell in enumerate(cells):
            cell = cell.strip()
            if cell == "":
                raise CsvFormatError(f"{path}:{lineno}: blank cell in column {names[j]!r}")
            try:
                columns[j].append(float(cell))
            except ValueError:
                raise CsvFormatError(
                    f"{path}:{lineno}: non-numeric cell {cell!r} in column {names[j]!r}"
                ) from None
    if not columns[0]:
        raise CsvFormatError(f"{path}: no data rows")
    series = tuple(TimeSeries(n, np.array(c)) for n, c in zip(names, columns))
    return validate_dataset(Dataset(series, sampling_step))


def write_dataset_csv(d: Dataset, path) -> None:
    """Write the dataset as CSV (header of names, one time step per row)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(d.names)
        matrix = np.column_stack([s.values for s in d.series])
        for row in matrix:
            writer.writerow([repr(float(v)) for v in row])
