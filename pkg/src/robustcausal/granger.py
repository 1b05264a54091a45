"""Lag-specific Granger causality via nested OLS models and an F-test.

For a candidate link from x to y at lag p, the full model regresses y on an
intercept, its own lags 1..p, and the source term(s); the reduced model
drops the source term(s). Both are fitted on the identical sample window
``i in [p, l)``. In the default lagwise mode the source contributes only
``x[i - p]`` (one restriction), which localizes the test to a single lag;
cumulative mode includes ``x[i - 1] .. x[i - p]`` (p restrictions).

The test statistic is

    F = ((RSS_reduced - RSS_full) / k) / (RSS_full / (N - params_full))

with k restrictions, referred to the F(k, N - params_full) distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidConfig, LengthMismatch, NonFinite, SingularDesign, TooShort
from .timeseries import TimeSeries

__all__ = ["GrangerConfig", "GrangerResult", "granger_test"]

# Gram matrices worse conditioned than this are treated as singular.
_COND_LIMIT = 1e10


@dataclass(frozen=True)
class GrangerConfig:
    """Settings for Granger link tests.

    ``order`` caps the lag a test may use; ``lagwise`` picks the
    single-lag source term (the default) over the cumulative form.
    """

    order: int = 4
    alpha: float = 0.05
    lagwise: bool = True

    def __post_init__(self):
        if self.order < 1:
            raise InvalidConfig(f"order must be >= 1, got {self.order}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidConfig(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class GrangerResult:
    """Outcome of one Granger link test."""

    f_statistic: float
    p_value: float
    link: bool
    rss_full: float
    rss_reduced: float
    df_num: int
    df_den: int


def _ols_rss(design: np.ndarray, target: np.ndarray) -> float:
    """Residual sum of squares of an OLS fit via the normal equations."""
    gram = design.T @ design
    if np.linalg.cond(gram) > _COND_LIMIT:
        raise SingularDesign(
            f"regression design is numerically singular ({design.shape[1]} columns)"
        )
    beta = np.linalg.solve(gram, design.T @ target)
    resid = target - design @ beta
    return float(np.dot(resid, resid))


def granger_test(x: TimeSeries, y: TimeSeries, lag: int, cfg: GrangerConfig) -> GrangerResult:
    """F-test of whether lagged x improves the autoregressive fit of y."""
    if len(x) != len(y):
        raise LengthMismatch(
            f"series lengths differ: {x.name!r} has {len(x)}, {y.name!r} has {len(y)}"
        )
    if lag < 1:
        raise InvalidConfig(f"lag must be >= 1, got {lag}")
    if lag > cfg.order:
        raise InvalidConfig(f"lag {lag} exceeds configured order {cfg.order}")
    xv = x.values
    yv = y.values
    if not (np.all(np.isfinite(xv)) and np.all(np.isfinite(yv))):
        raise NonFinite("Granger test inputs must be finite")

    l = yv.size
    p = lag
    n_eff = l - p
    target = yv[p:]
    auto_cols = [yv[p - j : l - j] for j in range(1, p + 1)]
    if cfg.lagwise:
        source_cols = [xv[: l - p]]
    else:
        source_cols = [xv[p - j : l - j] for j in range(1, p + 1)]
    k = len(source_cols)
    params_full = 1 + p + k
    df_den = n_eff - params_full
    if df_den < 1:
        raise TooShort(
            f"length {l} leaves no residual degrees of freedom at lag {p} "
            f"({params_full} parameters, {n_eff} usable samples)"
        )

    ones = np.ones(n_eff)
    design_reduced = np.column_stack([ones] + auto_cols)
    design_full = np.column_stack([ones] + auto_cols + source_cols)
    rss_reduced = _ols_rss(design_reduced, target)
    rss_full = _ols_rss(design_full, target)

    numerator = max(0.0, rss_reduced - rss_full) / k
    denominator = rss_full / df_den
    if denominator == 0.0:
        f_statistic = math.inf if numerator > 0.0 else 0.0
    else:
        f_statistic = numerator / denominator
    p_value = float(stats.f.sf(f_statistic, k, df_den)) if math.isfinite(f_statistic) else 0.0
    return GrangerResult(
        f_statistic=f_statistic,
        p_value=p_value,
        link=p_value < cfg.alpha,
        rss_full=rss_full,
        rss_reduced=rss_reduced,
        df_num=k,
        df_den=df_den,
    )
