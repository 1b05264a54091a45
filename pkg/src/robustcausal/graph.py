"""Lagged causal graphs: candidate evaluation, construction, diffing,
and deterministic serialization (JSON, DOT, CSV).

A graph over k variables with maximum lag L is built by testing every
ordered pair at every lag 1..L, exactly k*(k-1)*L candidate links; only
significant candidates become graph links. Self-links are never tested.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InvalidConfig, LagTooLarge, UnknownFormat, VariableMismatch
from .estimators import BinningSpec
from .granger import GrangerConfig, granger_test
from .significance import SurrogateConfig, _name_key, _te_link_from_codes
from .timeseries import Dataset, validate_dataset

__all__ = [
    "CausalLink",
    "LaggedCausalGraph",
    "CandidateResult",
    "evaluate_candidates",
    "build_graph",
    "export_graph",
    "import_graph",
    "diff_graphs",
]

LinkKey = tuple[str, str, int]


@dataclass(frozen=True, order=True)
class CausalLink:
    """One directed lagged link with its strength (TE bits or GC F value)."""

    source: str
    target: str
    lag: int
    strength: float
    significant: bool = True


@dataclass(frozen=True)
class LaggedCausalGraph:
    """An immutable set of significant links over a fixed variable set.

    Variables and links are canonically sorted at construction so equal
    graphs compare equal and serialize to identical bytes.
    """

    variables: tuple[str, ...]
    links: tuple[CausalLink, ...]
    max_lag: int
    method: str

    def __post_init__(self):
        if self.max_lag < 1:
            raise InvalidConfig(f"max_lag must be >= 1, got {self.max_lag}")
        variables = tuple(sorted(self.variables))
        if len(set(variables)) != len(variables):
            raise InvalidConfig("graph variables must be unique")
        links = tuple(sorted(self.links, key=lambda l: (l.source, l.target, l.lag)))
        known = set(variables)
        seen: set[LinkKey] = set()
        for link in links:
            if link.source not in known or link.target not in known:
                raise VariableMismatch(
                    f"link {link.source}->{link.target} references an unknown variable"
                )
            if link.source == link.target:
                raise InvalidConfig(f"self-link on {link.source!r} is not allowed")
            if not 1 <= link.lag <= self.max_lag:
                raise InvalidConfig(
                    f"link {link.source}->{link.target} lag {link.lag} outside 1..{self.max_lag}"
                )
            key = (link.source, link.target, link.lag)
            if key in seen:
                raise InvalidConfig(f"duplicate link {key}")
            seen.add(key)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "links", links)

    def link_keys(self) -> frozenset[LinkKey]:
        return frozenset((l.source, l.target, l.lag) for l in self.links)

    @property
    def n_links(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class CandidateResult:
    """Evaluation record of one candidate link, significant or not."""

    source: str
    target: str
    lag: int
    strength: float
    significant: bool


def evaluate_candidates(
    d: Dataset,
    max_lag: int = 4,
    method: str = "te",
    *,
    surrogate: SurrogateConfig | None = None,
    granger: GrangerConfig | None = None,
    bins: int | None = None,
) -> list[CandidateResult]:
    """Test every ordered pair at every lag 1..max_lag and record the outcome.

    With ``method="te"`` each candidate runs the gated surrogate TE link
    test (strength = TE in bits); with ``method="gc"`` the lagwise or
    cumulative Granger F-test (strength = F statistic). ``bins`` forces a
    bin count for the TE path instead of the Scott's-rule derivation.
    """
    validate_dataset(d)
    if max_lag < 1:
        raise InvalidConfig(f"max_lag must be >= 1, got {max_lag}")
    if max_lag >= d.length / 4:
        raise LagTooLarge(
            f"max_lag {max_lag} is too large for length {d.length} (must stay below length/4)"
        )
    if method not in ("te", "gc"):
        raise InvalidConfig(f"method must be 'te' or 'gc', got {method!r}")

    results: list[CandidateResult] = []
    if method == "te":
        if surrogate is None:
            raise InvalidConfig("TE graph construction needs a SurrogateConfig")
        spec = BinningSpec.from_dataset(d, bin_count=bins, allow_constant=True)
        codes = {s.name: spec.digitize(s) for s in d.series}
        keys = {s.name: _name_key(s.name) for s in d.series}
        for src in d.series:
            for tgt in d.series:
                if src.name == tgt.name:
                    continue
                for lag in range(1, max_lag + 1):
                    res = _te_link_from_codes(
                        codes[src.name],
                        codes[tgt.name],
                        lag,
                        spec.bin_count,
                        surrogate,
                        keys[src.name],
                        keys[tgt.name],
                    )
                    results.append(
                        CandidateResult(src.name, tgt.name, lag, res.te, res.link)
                    )
    else:
        cfg = granger if granger is not None else GrangerConfig(order=max_lag)
        if cfg.order < max_lag:
            cfg = GrangerConfig(order=max_lag, alpha=cfg.alpha, lagwise=cfg.lagwise)
        for src in d.series:
            for tgt in d.series:
                if src.name == tgt.name:
                    continue
                for lag in range(1, max_lag + 1):
                    res = granger_test(src, tgt, lag, cfg)
                    results.append(
                        CandidateResult(src.name, tgt.name, lag, res.f_statistic, res.link)
                    )
    return results


def build_graph(
    d: Dataset,
    max_lag: int = 4,
    method: str = "te",
    *,
    surrogate: SurrogateConfig | None = None,
    granger: GrangerConfig | None = None,
    bins: int | None = None,
) -> LaggedCausalGraph:
    """Build the graph of significant links among all candidates."""
    candidates = evaluate_candidates(
        d, max_lag, method, surrogate=surrogate, granger=granger, bins=bins
    )
    links = tuple(
        CausalLink(c.source, c.target, c.lag, c.strength, True)
        for c in candidates
        if c.significant
    )
    return LaggedCausalGraph(tuple(d.names), links, max_lag, method)


def _dot_identifier(name: str) -> str:
    if name and not name[0].isdigit() and all(c.isalnum() or c == "_" for c in name):
        return name
    return '"' + name.replace('"', '\\"') + '"'


def export_graph(g: LaggedCausalGraph, fmt: str = "json") -> str:
    """Serialize a graph to "json", "dot", or "csv" text.

    Output is deterministic: variables alphabetical, links sorted by
    (source, target, lag).
    """
    if fmt == "json":
        payload = {
            "method": g.method,
            "max_lag": g.max_lag,
            "variables": list(g.variables),
            "links": [
                {
                    "source": l.source,
                    "target": l.target,
                    "lag": l.lag,
                    "strength": l.strength,
                    "significant": l.significant,
                }
                for l in g.links
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if fmt == "dot":
        lines = ["digraph causal_links {"]
        for v in g.variables:
            lines.append(f"  {_dot_identifier(v)};")
        for l in g.links:
            lines.append(
                f'  {_dot_identifier(l.source)} -> {_dot_identifier(l.target)} [label="lag {l.lag}"];'
            )
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        lines = ["source,target,lag,strength,significant"]
        for l in g.links:
            flag = "true" if l.significant else "false"
            lines.append(f"{l.source},{l.target},{l.lag},{l.strength!r},{flag}")
        return "\n".join(lines) + "\n"
    raise UnknownFormat(f"unknown export format {fmt!r}")


def import_graph(text: str) -> LaggedCausalGraph:
    """Rebuild a graph from its JSON serialization (lossless round trip)."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UnknownFormat(f"not valid graph JSON: {exc}") from None
    try:
        links = tuple(
            CausalLink(
                source=l["source"],
                target=l["target"],
                lag=int(l["lag"]),
                strength=float(l["strength"]),
                significant=bool(l["significant"]),
            )
            for l in payload["links"]
        )
        return LaggedCausalGraph(
            variables=tuple(payload["variables"]),
            links=links,
            max_lag=int(payload["max_lag"]),
            method=str(payload["method"]),
        )
    except (KeyError, TypeError) as exc:
        raise UnknownFormat(f"graph JSON is missing fields: {exc}") from None


def diff_graphs(
    a: LaggedCausalGraph, b: LaggedCausalGraph
) -> tuple[frozenset[LinkKey], frozenset[LinkKey], frozenset[LinkKey]]:
    """Link keys present only in ``a``, only in ``b``, and in both."""
    if set(a.variables) != set(b.variables):
        raise VariableMismatch(
            f"graphs cover different variables: {a.variables} vs {b.variables}"
        )
    ka, kb = a.link_keys(), b.link_keys()
    return ka - kb, kb - ka, ka & kb
