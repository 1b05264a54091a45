"""Evaluation utilities: error-rate Monte Carlo curves, the ensemble
error budget, scoring inferred graphs against ground truth, and a bin
sensitivity scan.

Error-rate conventions
----------------------
On the bivariate benchmark (one true link X -> Y at lag 1) the false
negative rate is the fraction of trials in which the lag-1 link test does
not fire, and the false positive rate is the fraction in which the lag-2
test (a known non-link) does fire.

Ensemble error budget
---------------------
If one subsample analysis errs on a given link with probability ``e_s``
independently, the probability that at least ``k_min`` of ``n`` subsamples
err together is the binomial tail

    E(e_s) = sum_{i = k_min}^{n} C(n, i) e_s^i (1 - e_s)^(n - i)

which is what :func:`ensemble_error_binomial` computes. The companion
:func:`ensemble_miss_binomial` gives the complement reading for a true
link: the probability that *fewer* than ``k_min`` subsamples detect it
(detection probability ``1 - e_s``), i.e. that the consistency vote drops
a real link.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .ensemble import RobustGraph
from .errors import InvalidConfig, VariableMismatch
from .estimators import BinningSpec
from .graph import LaggedCausalGraph, LinkKey, build_graph
from .significance import SurrogateConfig, te_link_test
from .synthetic import GroundTruth, SystemSpec, generate
from .timeseries import Dataset

__all__ = [
    "ConfusionCounts",
    "TruthScore",
    "score_against_truth",
    "ensemble_error_binomial",
    "ensemble_miss_binomial",
    "ErrorRatePoint",
    "ErrorRateCurve",
    "monte_carlo_rates",
    "jaccard_links",
    "BinSensitivityReport",
    "bin_sensitivity_scan",
]


@dataclass(frozen=True)
class ConfusionCounts:
    """Link-level confusion counts over a candidate space."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def false_negative_rate(self) -> float:
        denom = self.tp + self.fn
        return self.fn / denom if denom else 0.0

    @property
    def false_positive_rate(self) -> float:
        denom = self.fp + self.tn
        return self.fp / denom if denom else 0.0


@dataclass(frozen=True)
class TruthScore:
    """Classified links behind one set of confusion counts.

    When indirect links are excluded, detected indirect links sit in
    ``indirect_detected`` and are counted in none of the four confusion
    cells; the cells plus ``indirect_detected`` still partition the
    candidate space.
    """

    counts: ConfusionCounts
    true_positives: tuple[LinkKey, ...]
    false_positives: tuple[LinkKey, ...]
    false_negatives: tuple[LinkKey, ...]
    indirect_detected: tuple[LinkKey, ...]


def score_against_truth(
    inferred: LaggedCausalGraph | RobustGraph,
    truth: GroundTruth,
    lag_range: range,
    exclude_indirect: bool = True,
) -> TruthScore:
    """Classify every candidate link of the graph against ground truth.

    Candidates are all ordered variable pairs at every lag in
    ``lag_range``. With ``exclude_indirect`` (the default) a detected link
    that matches a documented indirect pathway is reported separately
    instead of being counted as a false positive.
    """
    graph = inferred.graph if isinstance(inferred, RobustGraph) else inferred
    known = set(graph.variables)
    for key in list(truth.link_keys()) + list(truth.indirect_keys()):
        if key[0] not in known or key[1] not in known:
            raise VariableMismatch(
                f"ground truth references variable outside the graph: {key}"
            )
    inferred_keys = graph.link_keys()
    true_keys = truth.link_keys()
    indirect_keys = truth.indirect_keys() if exclude_indirect else frozenset()

    tp, fp, fn = [], [], []
    indirect_detected = []
    tn = 0
    for s in graph.variables:
        for t in graph.variables:
            if s == t:
                continue
            for lag in lag_range:
                key = (s, t, lag)
                detected = key in inferred_keys
                if key in true_keys:
                    (tp if detected else fn).append(key)
                elif detected and key in indirect_keys:
                    indirect_detected.append(key)
                elif detected:
                    fp.append(key)
                else:
                    tn += 1
    counts = ConfusionCounts(tp=len(tp), fp=len(fp), tn=tn, fn=len(fn))
    return TruthScore(
        counts=counts,
        true_positives=tuple(sorted(tp)),
        false_positives=tuple(sorted(fp)),
        false_negatives=tuple(sorted(fn)),
        indirect_detected=tuple(sorted(indirect_detected)),
    )


def _check_binomial_args(e_s: float, n: int, k_min: int) -> None:
    if not 0.0 <= e_s <= 1.0:
        raise InvalidConfig(f"per-subsample rate must be in [0, 1], got {e_s}")
    if n < 1:
        raise InvalidConfig(f"n must be >= 1, got {n}")
    if not 1 <= k_min <= n:
        raise InvalidConfig(f"k_min must be in 1..{n}, got {k_min}")


def ensemble_error_binomial(e_s: float, n: int, k_min: int) -> float:
    """Probability that at least ``k_min`` of ``n`` independent subsample
    analyses commit an error of per-subsample probability ``e_s``."""
    _check_binomial_args(e_s, n, k_min)
    return float(
        sum(comb(n, i) * e_s**i * (1.0 - e_s) ** (n - i) for i in range(k_min, n + 1))
    )


def ensemble_miss_binomial(e_s: float, n: int, k_min: int) -> float:
    """Probability that a true link is detected by fewer than ``k_min`` of
    ``n`` subsamples when each misses it with probability ``e_s``, i.e.
    that the consistency vote drops the link."""
    _check_binomial_args(e_s, n, k_min)
    detect = 1.0 - e_s
    return float(
        sum(comb(n, i) * detect**i * e_s ** (n - i) for i in range(0, k_min))
    )


@dataclass(frozen=True)
class ErrorRatePoint:
    data_length: int
    m_over_eps: float
    fnr: float
    fpr: float
    n_trials: int


@dataclass(frozen=True)
class ErrorRateCurve:
    """FNR/FPR sampled over (length, signal-to-noise ratio) grid points."""

    kind: str
    points: tuple[ErrorRatePoint, ...]

    def point(self, data_length: int, m_over_eps: float) -> ErrorRatePoint:
        for p in self.points:
            if p.data_length == data_length and p.m_over_eps == m_over_eps:
                return p
        raise KeyError((data_length, m_over_eps))

    def to_csv(self) -> str:
        lines = ["data_length,m_over_eps,fnr,fpr,n_trials"]
        for p in self.points:
            lines.append(
                f"{p.data_length},{p.m_over_eps!r},{p.fnr!r},{p.fpr!r},{p.n_trials}"
            )
        return "\n".join(lines) + "\n"


def monte_carlo_rates(
    kind: str,
    lengths: list[int],
    ratios: list[float],
    n_trials: int,
    rng_seed: int,
    n_surrogates: int = 100,
    confidence: float = 0.95,
) -> ErrorRateCurve:
    """Estimate FNR and FPR of the TE link test on the bivariate benchmark.

    ``kind`` is "bivariate-linear" or "bivariate-nonlinear" (plain
    "linear"/"nonlinear" are accepted). Per trial a fresh sample of the
    requested length is generated with signal m = ratio and noise eps = 1,
    then the gated TE link test runs at lag 1 (miss -> false negative) and
    lag 2 (fire -> false positive). Trial RNG streams derive from
    (seed, length index, ratio index, trial), so single points are
    reproducible in isolation.
    """
    if kind in ("linear", "nonlinear"):
        kind = f"bivariate-{kind}"
    if kind not in ("bivariate-linear", "bivariate-nonlinear"):
        raise InvalidConfig(f"kind must be a bivariate system, got {kind!r}")
    if n_trials < 1:
        raise InvalidConfig(f"n_trials must be >= 1, got {n_trials}")
    points = []
    for li, length in enumerate(lengths):
        for ri, ratio in enumerate(ratios):
            misses = 0
            false_alarms = 0
            for trial in range(n_trials):
                base = [int(rng_seed) & 0xFFFFFFFF, li, ri, trial]
                data_seed = int(np.random.SeedSequence(base + [0]).generate_state(1, np.uint32)[0])
                test_seed = int(np.random.SeedSequence(base + [1]).generate_state(1, np.uint32)[0])
                d, _ = generate(
                    SystemSpec(
                        kind=kind,
                        length=length,
                        rng_seed=data_seed,
                        signal=ratio,
                        noise=1.0,
                    )
                )
                spec = BinningSpec.from_dataset(d)
                cfg = SurrogateConfig(
                    rng_seed=test_seed,
                    n_surrogates=n_surrogates,
                    confidence=confidence,
                )
                x, y = d.get("X"), d.get("Y")
                if not te_link_test(x, y, 1, spec, cfg).link:
                    misses += 1
                if te_link_test(x, y, 2, spec, cfg).link:
                    false_alarms += 1
            points.append(
                ErrorRatePoint(
                    data_length=length,
                    m_over_eps=float(ratio),
                    fnr=misses / n_trials,
                    fpr=false_alarms / n_trials,
                    n_trials=n_trials,
                )
            )
    return ErrorRateCurve(kind=kind, points=tuple(points))


def jaccard_links(a: LaggedCausalGraph, b: LaggedCausalGraph) -> float:
    """Jaccard similarity of two graphs' link sets (1.0 when both empty)."""
    ka, kb = a.link_keys(), b.link_keys()
    union = ka | kb
    if not union:
        return 1.0
    return len(ka & kb) / len(union)


@dataclass(frozen=True)
class BinSensitivityReport:
    """Graphs and their similarity to the center graph across bin counts."""

    center_bins: int
    graphs: dict[int, LaggedCausalGraph]
    jaccard: dict[int, float]

    def stable(self) -> bool:
        return all(v == 1.0 for v in self.jaccard.values())


def bin_sensitivity_scan(
    d: Dataset,
    center_bins: int,
    radius: int,
    *,
    max_lag: int = 4,
    surrogate: SurrogateConfig,
) -> BinSensitivityReport:
    """Rebuild the TE graph at bin counts center - radius .. center + radius
    and report each link set's Jaccard similarity to the center graph."""
    if radius < 0:
        raise InvalidConfig(f"radius must be >= 0, got {radius}")
    if center_bins - radius < 2:
        raise InvalidConfig(
            f"center {center_bins} with radius {radius} dips below 2 bins"
        )
    graphs = {}
    for m in range(center_bins - radius, center_bins + radius + 1):
        graphs[m] = build_graph(d, max_lag, "te", surrogate=surrogate, bins=m)
    center = graphs[center_bins]
    similarity = {m: jaccard_links(center, g) for m, g in graphs.items()}
    return BinSensitivityReport(center_bins=center_bins, graphs=graphs, jaccard=similarity)
