"""Synthetic benchmark systems with known lagged causal structure.

Four system kinds are available:

``A``
    Four mutually independent standard-normal series (no links at all),
    the negative control.
``B``
    Four linearly coupled autoregressive series::

        X(t) = 0.4 Z(t-1) + eta_x(t)
        Y(t) = 0.6 X(t-3) + 0.09 W(t-2) + eta_y(t)
        Z(t) = 0.7 Y(t-2) + eta_z(t)
        W(t) = 0.5 X(t-1) + eta_w(t)

    with independent standard-normal noise per variable. The first
    ``burn_in`` steps are discarded so the output is past transients.
``C``
    Same as B except the first coupling is quadratic:
    ``X(t) = 0.4 Z(t-1)**2 + eta_x(t)``.
``bivariate-linear`` / ``bivariate-nonlinear``
    A two-variable pair driven by an i.i.d. standard-normal source::

        Y(t) = m X(t-1)     + eps eta(t)      (linear)
        Y(t) = m X(t-1)**2  + eps eta(t)      (nonlinear)

    The single true link is X -> Y at lag 1. Exactly ``length`` points are
    produced (no recursion, so no burn-in is needed).

Alongside the data, :func:`generate` returns the ground truth: the direct
links written into the equations plus the indirect (transitive) links that
lag composition produces, which a pairwise detector may legitimately pick
up without them being directly simulated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, NonFinite
from .timeseries import Dataset, TimeSeries

__all__ = ["SystemSpec", "GroundTruth", "TrueLink", "generate", "SYSTEM_KINDS"]

SYSTEM_KINDS = ("A", "B", "C", "bivariate-linear", "bivariate-nonlinear")

_COUPLED_NAMES = ("X", "Y", "Z", "W")

# Indirect links by lag composition of the direct couplings, per system.
# Example: Z drives X at lag 1 and X drives Y at lag 3, so Z also shows up
# at Y with lag 4 without a simulated Z->Y term.
_INDIRECT_B = (("Z", "Y", 4), ("W", "Z", 4), ("Z", "W", 2), ("Y", "X", 3))
_INDIRECT_C = (("Z", "W", 2), ("Y", "X", 3), ("Y", "W", 4), ("W", "Z", 4), ("Z", "Y", 4))


@dataclass(frozen=True)
class TrueLink:
    source: str
    target: str
    lag: int
    coefficient: float


@dataclass(frozen=True)
class GroundTruth:
    """Direct links of the generating equations plus documented indirect links."""

    true_links: tuple[TrueLink, ...]
    indirect_links: tuple[tuple[str, str, int], ...] = ()

    def link_keys(self) -> frozenset[tuple[str, str, int]]:
        return frozenset((l.source, l.target, l.lag) for l in self.true_links)

    def indirect_keys(self) -> frozenset[tuple[str, str, int]]:
        return frozenset(self.indirect_links)

    def to_json(self) -> str:
        payload = {
            "true_links": [
                {
                    "source": l.source,
                    "target": l.target,
                    "lag": l.lag,
                    "coefficient": l.coefficient,
                }
                for l in self.true_links
            ],
            "indirect_links": [
                {"source": s, "target": t, "lag": lag} for s, t, lag in self.indirect_links
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        payload = json.loads(text)
        return cls(
            true_links=tuple(
                TrueLink(l["source"], l["target"], int(l["lag"]), float(l["coefficient"]))
                for l in payload["true_links"]
            ),
            indirect_links=tuple(
                (l["source"], l["target"], int(l["lag"])) for l in payload["indirect_links"]
            ),
        )


@dataclass(frozen=True)
class SystemSpec:
    """What to simulate.

    ``length`` is the number of generated steps for the coupled systems
    (B and C output ``length - burn_in`` points after the transient is
    dropped; A and the bivariate kinds output exactly ``length``).
    ``signal`` and ``noise`` are the bivariate coefficients m and eps.
    """

    kind: str
    length: int
    rng_seed: int
    burn_in: int = 100
    signal: float | None = None
    noise: float | None = None

    def __post_init__(self):
        if self.kind not in SYSTEM_KINDS:
            raise InvalidConfig(f"unknown system kind {self.kind!r}, expected one of {SYSTEM_KINDS}")
        if self.length < 1:
            raise InvalidConfig(f"length must be >= 1, got {self.length}")
        if self.burn_in < 0:
            raise InvalidConfig(f"burn_in must be >= 0, got {self.burn_in}")
        if self.kind in ("B", "C") and self.length <= self.burn_in:
            raise InvalidConfig(
                f"length {self.length} must exceed burn_in {self.burn_in} for kind {self.kind!r}"
            )
        if self.kind.startswith("bivariate"):
            if self.signal is None:
                raise InvalidConfig(f"kind {self.kind!r} needs a signal coefficient")
            eps = 1.0 if self.noise is None else self.noise
            if eps <= 0:
                raise InvalidConfig(f"noise coefficient must be > 0, got {eps}")


def _variable_stream(seed: int, index: int) -> np.random.Generator:
    """Independent noise stream for one variable of one simulation."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, index])


# Magnitude beyond which the quadratic recursion has irreversibly left the
# stationary regime (stationary values stay below ~30; noise is O(1)).
_DIVERGENCE_LIMIT = 1e8


def _simulate_coupled(
    n: int,
    eta_x: np.ndarray,
    eta_y: np.ndarray,
    eta_z: np.ndarray,
    eta_w: np.ndarray,
    squared_z: bool,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Run the four-variable recursion on explicit noise arrays.

    Values at negative time indices are zero, so the recursion starts from
    rest and is driven purely by the supplied noise.

    The quadratic variant is only metastable: the loop Z -> X -> Y -> Z has
    an effective map ``z -> 0.168 z**2``, so a noise excursion beyond
    ``|z| ~ 6`` triggers super-exponential blow-up. Such realizations raise
    :class:`NonFinite` rather than returning astronomically large values.
    """
    x = np.zeros(n)
    y = np.zeros(n)
    z = np.zeros(n)
    w = np.zeros(n)
    for t in range(n):
        z1 = z[t - 1] if t >= 1 else 0.0
        x3 = x[t - 3] if t >= 3 else 0.0
        w2 = w[t - 2] if t >= 2 else 0.0
        y2 = y[t - 2] if t >= 2 else 0.0
        x1 = x[t - 1] if t >= 1 else 0.0
        x[t] = 0.4 * (z1 * z1 if squared_z else z1) + eta_x[t]
        y[t] = 0.6 * x3 + 0.09 * w2 + eta_y[t]
        z[t] = 0.7 * y2 + eta_z[t]
        w[t] = 0.5 * x1 + eta_w[t]
        if squared_z and abs(x[t]) > _DIVERGENCE_LIMIT:
            raise NonFinite(
                f"quadratic system diverged at step {t}; this noise realization "
                "leaves the stable regime, use a different rng_seed"
            )
    return x, y, z, w


def generate(spec: SystemSpec) -> tuple[Dataset, GroundTruth]:
    """Simulate the configured system and return (dataset, ground truth)."""
    if spec.kind == "A":
        series = tuple(
            TimeSeries(name, _variable_stream(spec.rng_seed, i).standard_normal(spec.length))
            for i, name in enumerate(_COUPLED_NAMES)
        )
        return Dataset(series, "synthetic"), GroundTruth(true_links=())

    if spec.kind in ("B", "C"):
        eta = [
            _variable_stream(spec.rng_seed, i).standard_normal(spec.length)
            for i in range(4)
        ]
        x, y, z, w = _simulate_coupled(spec.length, *eta, squared_z=spec.kind == "C")
        cut = spec.burn_in
        series = tuple(
            TimeSeries(name, arr[cut:])
            for name, arr in zip(_COUPLED_NAMES, (x, y, z, w))
        )
        truth = GroundTruth(
            true_links=(
                TrueLink("Z", "X", 1, 0.4),
                TrueLink("X", "Y", 3, 0.6),
                TrueLink("W", "Y", 2, 0.09),
                TrueLink("Y", "Z", 2, 0.7),
                TrueLink("X", "W", 1, 0.5),
            ),
            indirect_links=_INDIRECT_B if spec.kind == "B" else _INDIRECT_C,
        )
        return Dataset(series, "synthetic"), truth

    # bivariate kinds: X is i.i.d., Y responds at lag 1, no recursion.
    m = float(spec.signal)
    eps = 1.0 if spec.noise is None else float(spec.noise)
    x_full = _variable_stream(spec.rng_seed, 0).standard_normal(spec.length + 1)
    eta = _variable_stream(spec.rng_seed, 1).standard_normal(spec.length)
    driver = x_full[:-1]
    if spec.kind == "bivariate-nonlinear":
        driver = driver * driver
    y = m * driver + eps * eta
    d = Dataset(
        (TimeSeries("X", x_full[1:]), TimeSeries("Y", y)),
        "synthetic",
    )
    truth = GroundTruth(true_links=(TrueLink("X", "Y", 1, m),))
    return d, truth
