"""Group-based robust t-statistic inference.

The sample is cut into ``q`` consecutive blocks of ``floor(T/q)``
observations, the dependence measure is estimated inside every block, and the
``q`` block estimates are fed to an ordinary one-sample t-test.  Student-t
critical values with ``q - 1`` degrees of freedom are conservative at levels
up to ``2 Phi(-sqrt 3) = 0.0833`` for every ``q`` (and up to 0.1 when
``q <= 14``); beyond that, critical values come from inverting the
Bakirov-Szekely tail bound implemented in :func:`p_value_bound`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import series
from .errors import ConfigError, DataError, DegenerateSeriesError
from .series import DependenceSpec
from .special import norm_cdf, t_ppf, t_sf2

#: 2 * Phi(-sqrt(3)), the level up to which Student-t critical values are valid for any q
GUARANTEED_LEVEL = 2.0 * norm_cdf(-math.sqrt(3.0))
SMALL_Q_LEVEL = 0.1
SMALL_Q_MAX = 14


@dataclass(frozen=True)
class GroupPartition:
    """Consecutive equal-size blocks; ranges are 0-based half-open ``(start, stop)``."""

    T: int
    q: int
    group_size: int
    ranges: tuple[tuple[int, int], ...]
    discarded: int


def partition(T: int, q: int, max_lag: int = 0) -> GroupPartition:
    """Split ``T`` observations into ``q`` blocks, dropping the ``T mod q`` trailing ones."""
    if int(q) != q or q < 2:
        raise ConfigError(f"need q >= 2 groups, got {q}")
    q, T = int(q), int(T)
    m = T // q
    if m < 2 + max_lag:
        raise DataError(
            f"groups of {m} observations are too small for lag {max_lag} (T={T}, q={q})"
        )
    ranges = tuple((j * m, (j + 1) * m) for j in range(q))
    return GroupPartition(T=T, q=q, group_size=m, ranges=ranges, discarded=T - q * m)


def group_view(x: np.ndarray, q: int) -> np.ndarray:
    """Reshape the last axis ``T`` into ``(q, floor(T/q))``, dropping the remainder."""
    m = x.shape[-1] // q
    return x[..., : q * m].reshape(*x.shape[:-1], q, m)


def batch_group_estimates(x: np.ndarray, spec: DependenceSpec, q: int) -> np.ndarray:
    """Group estimates for a stack of series, shape ``(..., q)``; ``nan`` marks degenerate groups."""
    return series.estimates(group_view(x, q), spec)


def group_estimates(x, spec: DependenceSpec, q: int) -> np.ndarray:
    """Estimate ``spec`` within each of the ``q`` groups (group-local means and divisor)."""
    x = series.as_series(x)
    if int(q) != q or q < 2:
        raise ConfigError(f"need q >= 2 groups, got {q}")
    if x.size // q <= spec.lag:
        raise DataError(f"groups of {x.size // q} observations leave no terms at lag {spec.lag}")
    est = batch_group_estimates(x, spec, q)
    bad = np.flatnonzero(np.isnan(est))
    if bad.size:
        raise DegenerateSeriesError(f"group {bad[0] + 1} of {q} has zero sample variance")
    return est


def _mean_std(estimates: np.ndarray):
    q = estimates.shape[-1]
    mean = estimates.mean(axis=-1)
    dev = estimates - mean[..., None]
    std = np.sqrt((dev * dev).sum(axis=-1) / (q - 1))
    return mean, std


def t_statistic(estimates, beta0: float = 0.0) -> float:
    """``sqrt(q) (mean - beta0) / s`` with the ``1/(q-1)`` sample standard deviation."""
    est = np.asarray(estimates, dtype=float)
    if est.ndim != 1 or est.size < 2:
        raise ConfigError("need at least two group estimates")
    mean, std = _mean_std(est)
    if std == 0.0:
        raise DegenerateSeriesError("group estimates have zero sample variance")
    return float(math.sqrt(est.size) * (mean - beta0) / std)


def batch_t_statistics(estimates: np.ndarray, beta0: float = 0.0) -> np.ndarray:
    """Row-wise t-statistics without raising.

    Rows whose estimates are all equal get 0 when the mean equals ``beta0`` and
    ``+-inf`` otherwise; rows containing ``nan`` stay ``nan``.
    """
    q = estimates.shape[-1]
    mean, std = _mean_std(estimates)
    diff = mean - beta0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = math.sqrt(q) * diff / std
    flat = std == 0.0
    return np.where(flat, np.where(diff == 0.0, 0.0, np.copysign(np.inf, diff)), t)


def p_value_bound(q: int, x: float) -> float:
    """Asymptotic bound on ``P(|t| > x)`` under the null, valid for any level.

    ``max_{R < k <= q} P(|T_{k-1}| > sqrt(R (k-1) / (k-R)))`` with
    ``R = q x^2 / (x^2 + q - 1)``.  For ``q = 2`` this is exactly the two-sided
    ``t_1`` tail at ``x``.
    """
    if int(q) != q or q < 2:
        raise ConfigError(f"need q >= 2, got {q}")
    q = int(q)
    x = abs(float(x))
    if math.isinf(x):
        return 0.0
    x2 = x * x
    R = q * x2 / (x2 + q - 1)
    k_lo = max(2, math.floor(R) + 1)
    if k_lo > q:
        # R == q only in the x -> inf limit
        return t_sf2(x, q - 1)
    best = 0.0
    for k in range(k_lo, q + 1):
        best = max(best, t_sf2(math.sqrt(R * (k - 1) / (k - R)), k - 1))
    return min(1.0, max(0.0, best))


def _check_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must lie in (0, 1), got {level}")
    return float(level)


def student_t_regime(q: int, level: float) -> bool:
    """True when the plain Student-t critical value is known to be conservative."""
    return level <= GUARANTEED_LEVEL or (level <= SMALL_Q_LEVEL and 2 <= q <= SMALL_Q_MAX)


def critical_value(q: int, level: float) -> float:
    """Two-sided critical value for the group t-test at significance ``level``."""
    if int(q) != q or q < 2:
        raise ConfigError(f"need q >= 2, got {q}")
    q = int(q)
    level = _check_level(level)
    cv_t = t_ppf(1.0 - 0.5 * level, q - 1)
    if student_t_regime(q, level):
        return cv_t
    # smallest x with bound(x) <= level; the bound dominates the t tail, so x >= cv_t
    lo, hi = 0.0, max(cv_t, 1.0)
    while p_value_bound(q, hi) > level:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if p_value_bound(q, mid) > level:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return hi


def confidence_interval(estimates, level: float = 0.95) -> tuple[float, float]:
    """``mean +- cv * s / sqrt(q)`` with ``cv = critical_value(q, 1 - level)``.

    The ``1/sqrt(q)`` makes the interval the exact inversion of the group
    t-test.
    """
    est = np.asarray(estimates, dtype=float)
    if est.ndim != 1 or est.size < 2:
        raise ConfigError("need at least two group estimates")
    level = _check_level(level)
    q = est.size
    mean, std = _mean_std(est)
    half = critical_value(q, 1.0 - level) * std / math.sqrt(q)
    return float(mean - half), float(mean + half)


def sn_from_t(q: int, t: float) -> float:
    """Self-normalized sum ``sum X / sqrt(sum X^2)`` expressed through the t-statistic."""
    return t / math.sqrt(1.0 + (t * t - 1.0) / q)


def edelman_p(q: int, x: float) -> float:
    """Edelman's bound on ``P(|t_q| > x)`` for independent symmetric summands."""
    if not x > 0:
        raise ConfigError(f"edelman_p needs x > 0, got {x}")
    r = math.sqrt(1.0 + (x * x - 1.0) / q)
    g = 1.0 - norm_cdf(x / r - 1.5 * r / x)
    return min(1.0, max(0.0, g))


@dataclass(frozen=True)
class GroupTestResult:
    estimates: np.ndarray
    pooled: float
    s_beta: float
    t_stat: float
    p_value: float
    ci: tuple[float, float]
    q: int
    beta0: float
    level: float
    critical_value: float
    reject: bool
    degenerate: bool = False
    discarded: int = 0

    @property
    def method(self) -> str:
        return f"group_t(q={self.q})"


def group_test_from_estimates(
    estimates, beta0: float = 0.0, level: float = 0.95, discarded: int = 0
) -> GroupTestResult:
    """Group t-test on precomputed group estimates (any estimator, e.g. a composite)."""
    level = _check_level(level)
    est = np.asarray(estimates, dtype=float)
    if est.ndim != 1 or est.size < 2:
        raise ConfigError("need at least two group estimates")
    if not np.all(np.isfinite(est)):
        raise DataError("group estimates must be finite")
    q = est.size
    mean, std = _mean_std(est)
    cv = critical_value(q, 1.0 - level)
    degenerate = bool(std == 0.0)
    if degenerate:
        t = 0.0 if mean == beta0 else math.copysign(math.inf, mean - beta0)
        p = 1.0 if mean == beta0 else 0.0
    else:
        t = math.sqrt(q) * (mean - beta0) / std
        p = p_value_bound(q, abs(t))
    half = cv * std / math.sqrt(q)
    return GroupTestResult(
        estimates=est,
        pooled=float(mean),
        s_beta=float(std),
        t_stat=float(t),
        p_value=p,
        ci=(float(mean - half), float(mean + half)),
        q=int(q),
        beta0=float(beta0),
        level=level,
        critical_value=cv,
        reject=bool(abs(t) > cv),
        degenerate=degenerate,
        discarded=int(discarded),
    )


def run_group_test(
    x, spec: DependenceSpec, q: int = 8, beta0: float = 0.0, level: float = 0.95
) -> GroupTestResult:
    """Group t-test of ``H0: beta = beta0`` with a ``level`` confidence interval.

    ``p_value`` is the conservative bound from :func:`p_value_bound`.
    """
    level = _check_level(level)
    x = series.as_series(x)
    part = partition(x.size, q, max_lag=spec.lag)
    est = group_estimates(x, spec, q)
    return group_test_from_estimates(est, beta0, level, part.discarded)
