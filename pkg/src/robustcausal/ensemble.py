"""Subsample-ensemble consistency filtering of lagged causal graphs.

The idea: a link inferred from the full sample is only trusted if it keeps
reappearing when the analysis is repeated on many shorter contiguous
windows of the same record. The pipeline draws ``n`` windows of length
``q``, builds one graph per window, counts how often each (source, target,
lag) link shows up, and keeps the links whose appearance count reaches
``ceil(threshold * n)``.

Window schemes
--------------
``random-continuous``
    Each window start is drawn uniformly from ``[0, l - q]``; windows may
    overlap. Start draws use one RNG stream per window index, so window j
    is the same no matter how many other windows are requested.
``fixed-overlap``
    Exactly three windows: first, centered, last.
``nonoverlapping``
    Starts at ``0, q, 2q, ...``; requires ``n * q <= l``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidConfig, TooManyWindows, VariableMismatch, WindowTooLong
from .estimators import BinningSpec
from .granger import GrangerConfig
from .graph import CausalLink, LaggedCausalGraph, LinkKey, build_graph
from .significance import SurrogateConfig, _name_key, _te_link_from_codes
from .timeseries import Dataset, validate_dataset

__all__ = [
    "EnsembleConfig",
    "LinkFrequencyTable",
    "RobustGraph",
    "EnsembleResult",
    "draw_subsamples",
    "link_frequencies",
    "robust_graph",
    "analyze_ensemble",
]

SUBSAMPLE_MODES = ("random-continuous", "fixed-overlap", "nonoverlapping")


@dataclass(frozen=True)
class EnsembleConfig:
    """How to draw subsamples and how strict the consistency vote is."""

    n_subsamples: int
    subsample_length: int
    rng_seed: int
    mode: str = "random-continuous"
    threshold: float = 0.9

    def __post_init__(self):
        if self.n_subsamples < 1:
            raise InvalidConfig(f"n_subsamples must be >= 1, got {self.n_subsamples}")
        if self.subsample_length < 2:
            raise InvalidConfig(
                f"subsample_length must be >= 2, got {self.subsample_length}"
            )
        if self.mode not in SUBSAMPLE_MODES:
            raise InvalidConfig(
                f"mode must be one of {SUBSAMPLE_MODES}, got {self.mode!r}"
            )
        if self.mode == "fixed-overlap" and self.n_subsamples != 3:
            raise InvalidConfig(
                f"fixed-overlap mode draws exactly 3 windows, got n_subsamples={self.n_subsamples}"
            )
        if not 0.0 < self.threshold <= 1.0:
            raise InvalidConfig(f"threshold must be in (0, 1], got {self.threshold}")


def _required_count(threshold: float, n: int) -> int:
    """Votes needed to keep a link: ceil(threshold * n), guarded against
    float noise pushing an exact product over the next integer."""
    return int(np.ceil(threshold * n - 1e-9))


def draw_subsamples(d: Dataset, cfg: EnsembleConfig) -> list[Dataset]:
    """Draw the configured contiguous windows from a validated dataset."""
    validate_dataset(d)
    l = d.length
    q = cfg.subsample_length
    if q >= l:
        raise WindowTooLong(f"subsample length {q} does not fit in sample length {l}")
    if cfg.mode == "random-continuous":
        starts = []
        for j in range(cfg.n_subsamples):
            rng = np.random.default_rng([int(cfg.rng_seed) & 0xFFFFFFFF, j])
            starts.append(int(rng.integers(0, l - q, endpoint=True)))
    elif cfg.mode == "fixed-overlap":
        starts = [0, (l - q) // 2, l - q]
    else:
        if cfg.n_subsamples * q > l:
            raise TooManyWindows(
                f"{cfg.n_subsamples} nonoverlapping windows of length {q} "
                f"exceed sample length {l}"
            )
        starts = [j * q for j in range(cfg.n_subsamples)]
    return [d.window(start, q) for start in starts]


@dataclass(frozen=True)
class LinkFrequencyTable:
    """Appearance counts of every observed link across the subsample graphs.

    ``counts`` maps (source, target, lag) to the number of subsample graphs
    containing the link; ``mean_strengths`` averages the link strength over
    the graphs where it appeared. Keys absent from ``counts`` have count 0.
    """

    variables: tuple[str, ...]
    max_lag: int
    method: str
    n_subsamples: int
    counts: dict[LinkKey, int]
    mean_strengths: dict[LinkKey, float]

    def fraction(self, key: LinkKey) -> float:
        return self.counts.get(key, 0) / self.n_subsamples

    def candidate_keys(self) -> list[LinkKey]:
        """All (source, target, lag) candidates of the underlying search."""
        return [
            (s, t, lag)
            for s in self.variables
            for t in self.variables
            if s != t
            for lag in range(1, self.max_lag + 1)
        ]

    def to_csv(self) -> str:
        """CSV with one row per candidate link: source,target,lag,count,fraction."""
        lines = ["source,target,lag,count,fraction"]
        for key in sorted(self.candidate_keys()):
            s, t, lag = key
            count = self.counts.get(key, 0)
            lines.append(f"{s},{t},{lag},{count},{count / self.n_subsamples!r}")
        return "\n".join(lines) + "\n"


def link_frequencies(graphs: list[LaggedCausalGraph]) -> LinkFrequencyTable:
    """Count link appearances across subsample graphs.

    All graphs must agree on variables, max lag, and method.
    """
    if not graphs:
        raise InvalidConfig("need at least one subsample graph")
    first = graphs[0]
    counts: dict[LinkKey, int] = {}
    strength_sums: dict[LinkKey, float] = {}
    for g in graphs:
        if set(g.variables) != set(first.variables):
            raise VariableMismatch("subsample graphs cover different variables")
        if g.max_lag != first.max_lag or g.method != first.method:
            raise VariableMismatch("subsample graphs mix max_lag or method settings")
        for link in g.links:
            key = (link.source, link.target, link.lag)
            counts[key] = counts.get(key, 0) + 1
            strength_sums[key] = strength_sums.get(key, 0.0) + link.strength
    means = {key: strength_sums[key] / counts[key] for key in counts}
    return LinkFrequencyTable(
        variables=first.variables,
        max_lag=first.max_lag,
        method=first.method,
        n_subsamples=len(graphs),
        counts=counts,
        mean_strengths=means,
    )


@dataclass(frozen=True)
class RobustGraph:
    """The consistency-filtered graph plus the frequency evidence behind it."""

    graph: LaggedCausalGraph
    frequencies: LinkFrequencyTable
    threshold: float


def robust_graph(freq: LinkFrequencyTable, threshold: float = 0.9) -> RobustGraph:
    """Keep the links whose appearance count reaches ceil(threshold * n)."""
    if not 0.0 < threshold <= 1.0:
        raise InvalidConfig(f"threshold must be in (0, 1], got {threshold}")
    required = _required_count(threshold, freq.n_subsamples)
    links = tuple(
        CausalLink(s, t, lag, freq.mean_strengths[(s, t, lag)], True)
        for (s, t, lag), count in freq.counts.items()
        if count >= required
    )
    graph = LaggedCausalGraph(freq.variables, links, freq.max_lag, freq.method)
    return RobustGraph(graph=graph, frequencies=freq, threshold=threshold)


@dataclass(frozen=True)
class EnsembleResult:
    """Everything one ensemble run produces."""

    full_graph: LaggedCausalGraph
    subsample_graphs: tuple[LaggedCausalGraph, ...]
    frequencies: LinkFrequencyTable
    robust: RobustGraph


def _derived_seed(seed: int, index: int) -> int:
    """Scalar surrogate seed for subsample ``index``, independent per index."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 0x5B5B, index])
    return int(ss.generate_state(1, np.uint32)[0])


def _subsample_graph(args) -> LaggedCausalGraph:
    window, max_lag, method, surrogate, granger, bins, parent_spec = args
    if parent_spec is not None:
        return _graph_with_spec(window, max_lag, method, surrogate, granger, parent_spec)
    return build_graph(
        window, max_lag, method, surrogate=surrogate, granger=granger, bins=bins
    )


def _graph_with_spec(
    window: Dataset,
    max_lag: int,
    method: str,
    surrogate: SurrogateConfig,
    granger: GrangerConfig | None,
    spec: BinningSpec,
) -> LaggedCausalGraph:
    """TE graph for one window using an externally supplied binning spec."""
    validate_dataset(window)
    codes = {s.name: spec.digitize(s) for s in window.series}
    keys = {s.name: _name_key(s.name) for s in window.series}
    links = []
    for src in window.names:
        for tgt in window.names:
            if src == tgt:
                continue
            for lag in range(1, max_lag + 1):
                res = _te_link_from_codes(
                    codes[src], codes[tgt], lag, spec.bin_count, surrogate, keys[src], keys[tgt]
                )
                if res.link:
                    links.append(CausalLink(src, tgt, lag, res.te, True))
    return LaggedCausalGraph(tuple(window.names), tuple(links), max_lag, method)


def analyze_ensemble(
    d: Dataset,
    cfg: EnsembleConfig,
    *,
    max_lag: int = 4,
    method: str = "te",
    surrogate: SurrogateConfig | None = None,
    granger: GrangerConfig | None = None,
    bins: int | None = None,
    reuse_parent_bins: bool = False,
    workers: int = 1,
) -> EnsembleResult:
    """Full pipeline: full-sample graph, per-window graphs, vote, filter.

    Each window's surrogate streams derive from (surrogate seed, window
    index), so results are reproducible and independent of ``workers``.
    With ``reuse_parent_bins`` the TE discretization derived on the full
    sample is reused for every window instead of re-derived per window.
    """
    validate_dataset(d)
    full_graph = build_graph(
        d, max_lag, method, surrogate=surrogate, granger=granger, bins=bins
    )
    parent_spec = None
    if method == "te" and reuse_parent_bins:
        parent_spec = BinningSpec.from_dataset(d, bin_count=bins, allow_constant=True)

    windows = draw_subsamples(d, cfg)
    tasks = []
    for j, window in enumerate(windows):
        sub_surrogate = surrogate
        if surrogate is not None:
            sub_surrogate = replace(surrogate, rng_seed=_derived_seed(surrogate.rng_seed, j))
        tasks.append((window, max_lag, method, sub_surrogate, granger, bins, parent_spec))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            graphs = list(pool.map(_subsample_graph, tasks))
    else:
        graphs = [_subsample_graph(task) for task in tasks]

    freq = link_frequencies(graphs)
    robust = robust_graph(freq, cfg.threshold)
    return EnsembleResult(
        full_graph=full_graph,
        subsample_graphs=tuple(graphs),
        frequencies=freq,
        robust=robust,
    )
