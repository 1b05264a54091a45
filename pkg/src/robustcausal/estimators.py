"""Histogram-based information estimators: entropy, mutual information,
and lagged transfer entropy on a shared equal-width binning.

Binning policy
--------------
All variables of a system are discretized with the *same* number of bins.
Per variable, Scott's rule gives a bin width ``3.5 * std / l**(1/3)`` and a
count ``ceil((max - min) / width)``; the system-wide count is the minimum
over variables. Each variable then gets its own equally spaced edges over
its observed range, rightmost edge inclusive.

Estimators
----------
Entropies are Shannon entropies in bits (log base 2), with empty bins
contributing zero. Mutual information is ``H(X) + H(Y) - H(X, Y)``.
Transfer entropy from a source X to a target Y at lag tau is assembled
from joint entropies of the aligned triple ``(x[t - tau], y[t - tau], y[t])``:

    TE = -H(Y_past) + H(X_past, Y_past) + H(Y_past, Y_now) - H(X_past, Y_past, Y_now)

which equals the conditional mutual information
``I(X_past ; Y_now | Y_past)`` of the empirical joint distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateBins,
    EmptyHistogram,
    InvalidConfig,
    LagTooLarge,
    LengthMismatch,
    ZeroVariance,
)
from .timeseries import Dataset, TimeSeries

__all__ = [
    "BinningSpec",
    "JointHistogram",
    "scott_bin_width",
    "variable_bin_count",
    "system_bin_count",
    "shannon_entropy",
    "mutual_information",
    "transfer_entropy",
]


def scott_bin_width(s: TimeSeries) -> float:
    """Scott's-rule bin width ``3.5 * std / l**(1/3)`` (sample std, ddof=1).

    A constant (or single-point) series yields width 0.0; callers that need
    a usable bin count must treat that as a zero-variance condition.
    """
    n = len(s)
    if n < 2:
        return 0.0
    sigma = float(s.values.std(ddof=1))
    return 3.5 * sigma / n ** (1.0 / 3.0)


def variable_bin_count(s: TimeSeries) -> int:
    """Bin count for one variable: ``ceil(range / scott_bin_width)``.

    Raises
    ------
    ZeroVariance
        if the series is constant (width 0).
    DegenerateBins
        if the count comes out below 2.
    """
    width = scott_bin_width(s)
    if width == 0.0:
        raise ZeroVariance(f"series {s.name!r} has zero variance")
    spread = float(s.values.max() - s.values.min())
    count = math.ceil(spread / width)
    if count < 2:
        raise DegenerateBins(
            f"series {s.name!r}: Scott's rule yields {count} bin(s), need at least 2"
        )
    return count


def system_bin_count(d: Dataset) -> int:
    """Shared bin count for a dataset: the minimum per-variable count."""
    return min(variable_bin_count(s) for s in d.series)


@dataclass(frozen=True, eq=False)
class BinningSpec:
    """A shared bin count plus per-variable equally spaced edges.

    ``edges[name]`` has ``bin_count + 1`` increasing entries spanning the
    observed range of that variable. Values are assigned by half-open bins
    with the rightmost edge inclusive, so every observed value lands in
    exactly one of the ``bin_count`` bins.
    """

    bin_count: int
    edges: dict[str, np.ndarray]

    def __post_init__(self):
        if self.bin_count < 2:
            raise DegenerateBins(f"bin_count must be >= 2, got {self.bin_count}")
        for name, e in self.edges.items():
            e = np.asarray(e, dtype=float)
            if e.shape != (self.bin_count + 1,):
                raise InvalidConfig(
                    f"edges for {name!r} must have {self.bin_count + 1} entries"
                )

    @classmethod
    def from_dataset(
        cls,
        d: Dataset,
        bin_count: int | None = None,
        allow_constant: bool = False,
    ) -> "BinningSpec":
        """Build a spec for a dataset, deriving the count by Scott's rule
        unless ``bin_count`` forces one.

        With ``allow_constant`` a constant variable does not abort the
        derivation: it is skipped for the count minimum and gets synthetic
        edges around its single value (all its samples land in one bin, so
        its entropy is zero). At least one variable must still vary.
        """
        if bin_count is None:
            counts = []
            for s in d.series:
                try:
                    counts.append(variable_bin_count(s))
                except ZeroVariance:
                    if not allow_constant:
                        raise
            if not counts:
                raise ZeroVariance("every variable in the dataset is constant")
            m = min(counts)
        else:
            if bin_count < 2:
                raise DegenerateBins(f"bin_count must be >= 2, got {bin_count}")
            m = int(bin_count)
        edges = {}
        for s in d.series:
            lo = float(s.values.min())
            hi = float(s.values.max())
            if hi == lo:
                if not allow_constant:
                    raise ZeroVariance(f"series {s.name!r} has zero variance")
                lo, hi = lo - 0.5, hi + 0.5
            edges[s.name] = np.linspace(lo, hi, m + 1)
        return cls(m, edges)

    def digitize(self, s: TimeSeries) -> np.ndarray:
        """Map values to bin indices in ``[0, bin_count)``.

        Bins are half-open on the right except the last, which includes its
        right edge. Values outside the edge span are clipped into the
        nearest end bin.
        """
        e = self.edges[s.name]
        idx = np.searchsorted(e, s.values, side="right") - 1
        return np.clip(idx, 0, self.bin_count - 1)


@dataclass(frozen=True, eq=False)
class JointHistogram:
    """Dense joint counts over 1 to 3 discretized variables."""

    dims: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != len(self.dims) or not 1 <= counts.ndim <= 3:
            raise InvalidConfig(
                f"counts must have one axis per dim (1..3), got shape {counts.shape} "
                f"for dims {self.dims}"
            )
        if np.any(counts < 0):
            raise InvalidConfig("histogram counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_series(cls, series: list[TimeSeries], spec: BinningSpec) -> "JointHistogram":
        """Joint histogram of aligned samples of up to three series."""
        if not 1 <= len(series) <= 3:
            raise InvalidConfig("a joint histogram covers 1 to 3 series")
        n = len(series[0])
        for s in series[1:]:
            if len(s) != n:
                raise LengthMismatch("joint histogram inputs must share a length")
        codes = [spec.digitize(s) for s in series]
        m = spec.bin_count
        counts = _joint_counts(codes, m).reshape((m,) * len(series))
        return cls(tuple(s.name for s in series), counts)


def _joint_counts(codes: list[np.ndarray], m: int) -> np.ndarray:
    """Flat joint counts (length m**k) of k aligned code arrays."""
    combined = codes[0]
    for c in codes[1:]:
        combined = combined * m + c
    return np.bincount(combined, minlength=m ** len(codes))


def _entropy_bits(counts: np.ndarray) -> float:
    """Shannon entropy in bits of one count table (any shape)."""
    flat = np.asarray(counts).ravel()
    total = flat.sum()
    if total <= 0:
        raise EmptyHistogram("histogram has zero total count")
    p = flat[flat > 0] / float(total)
    return float(-np.dot(p, np.log2(p)))


def _entropy_bits_rows(rows: np.ndarray) -> np.ndarray:
    """Row-wise Shannon entropy in bits of a (n, cells) count matrix."""
    totals = rows.sum(axis=1, keepdims=True).astype(float)
    p = rows / totals
    terms = np.zeros_like(p)
    mask = rows > 0
    terms[mask] = p[mask] * np.log2(p[mask])
    return -terms.sum(axis=1)


def shannon_entropy(h: JointHistogram) -> float:
    """Shannon entropy in bits, ``-sum(p * log2(p))`` over nonempty bins."""
    return _entropy_bits(h.counts)


def mutual_information(x: TimeSeries, y: TimeSeries, spec: BinningSpec) -> float:
    """Binned mutual information ``H(X) + H(Y) - H(X, Y)`` in bits.

    Exactly symmetric in its arguments: the joint histogram is built in a
    name-canonical order so both call orders produce bit-identical floats.
    Tiny negative rounding residue is clamped to 0.
    """
    if len(x) != len(y):
        raise LengthMismatch(
            f"series lengths differ: {x.name!r} has {len(x)}, {y.name!r} has {len(y)}"
        )
    a, b = sorted((x, y), key=lambda s: s.name)
    m = spec.bin_count
    joint = _joint_counts([spec.digitize(a), spec.digitize(b)], m).reshape(m, m)
    h_a = _entropy_bits(joint.sum(axis=1))
    h_b = _entropy_bits(joint.sum(axis=0))
    h_ab = _entropy_bits(joint)
    return max(0.0, h_a + h_b - h_ab)


def _te_from_codes(cx: np.ndarray, cy: np.ndarray, lag: int, m: int) -> float:
    """Transfer entropy in bits from full-length code arrays.

    Alignment: source past ``cx[: l - lag]``, target past ``cy[: l - lag]``,
    target present ``cy[lag :]``.
    """
    a = cx[: cx.size - lag]
    b = cy[: cy.size - lag]
    c = cy[lag:]
    joint3 = _joint_counts([a, b, c], m).reshape(m, m, m)
    h_b = _entropy_bits(joint3.sum(axis=(0, 2)))
    h_ab = _entropy_bits(joint3.sum(axis=2))
    h_bc = _entropy_bits(joint3.sum(axis=0))
    h_abc = _entropy_bits(joint3)
    return max(0.0, -h_b + h_ab + h_bc - h_abc)


def transfer_entropy(x: TimeSeries, y: TimeSeries, lag: int, spec: BinningSpec) -> float:
    """Binned transfer entropy from ``x`` to ``y`` at a positive lag, in bits.

    Both the source history and the target history use the same lag. The
    value equals the conditional mutual information
    ``I(x[t - lag]; y[t] | y[t - lag])`` of the aligned empirical joint
    distribution, so it is nonnegative up to rounding (clamped to 0) and
    bounded above by ``min(H(X), H(Y))`` over the aligned window.
    """
    if len(x) != len(y):
        raise LengthMismatch(
            f"series lengths differ: {x.name!r} has {len(x)}, {y.name!r} has {len(y)}"
        )
    if lag < 1:
        raise InvalidConfig(f"lag must be >= 1, got {lag}")
    if lag >= len(y):
        raise LagTooLarge(f"lag {lag} leaves no aligned samples for length {len(y)}")
    return _te_from_codes(spec.digitize(x), spec.digitize(y), lag, spec.bin_count)
