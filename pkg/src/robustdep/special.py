"""Student-t and normal distribution functions.

The Student-t CDF is evaluated through the regularized incomplete beta
function (scipy's Cephes routine); quantiles are found by a safeguarded
Newton iteration on the tail probability.  The normal CDF uses
``math.erfc`` and the normal quantile the stdlib ``NormalDist``.
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np
from scipy import special as _sp

from .errors import ConfigError, NumericalError

_STD_NORMAL = NormalDist()


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ConfigError("betainc_reg needs a, b > 0")
    return float(_sp.betainc(a, b, min(max(x, 0.0), 1.0)))


def _check_df(df: float) -> float:
    if not (df > 0 and math.isfinite(df)):
        raise ConfigError(f"degrees of freedom must be positive, got {df}")
    return float(df)


def t_sf2(x: float, df: float) -> float:
    """Two-sided tail ``P(|T_df| > x)`` for ``x >= 0``."""
    df = _check_df(df)
    x = abs(x)
    if math.isinf(x):
        return 0.0
    x2 = x * x
    if x2 < df:
        return 1.0 - betainc_reg(0.5, 0.5 * df, x2 / (df + x2))
    return betainc_reg(0.5 * df, 0.5, df / (df + x2))


def t_cdf(x: float, df: float) -> float:
    """Student-t cumulative distribution function."""
    df = _check_df(df)
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    x2 = x * x
    if x2 < df:
        half = 0.5 * betainc_reg(0.5, 0.5 * df, x2 / (df + x2))
        return 0.5 + half if x > 0 else 0.5 - half
    tail = 0.5 * betainc_reg(0.5 * df, 0.5, df / (df + x2))
    return 1.0 - tail if x > 0 else tail


def t_pdf(x: float, df: float) -> float:
    df = _check_df(df)
    log_c = math.lgamma(0.5 * (df + 1)) - math.lgamma(0.5 * df) - 0.5 * math.log(df * math.pi)
    return math.exp(log_c - 0.5 * (df + 1) * math.log1p(x * x / df))


def _upper_tail(x: float, df: float) -> float:
    return 0.5 * t_sf2(x, df)


def t_ppf(p: float, df: float) -> float:
    """Student-t quantile function."""
    df = _check_df(df)
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    if p == 0.5:
        return 0.0
    target = min(p, 1.0 - p)  # upper-tail probability of |quantile|
    sign = 1.0 if p > 0.5 else -1.0
    if df == 1.0:
        return sign / math.tan(math.pi * target)
    if df == 2.0:
        return sign * (1.0 - 2.0 * target) / math.sqrt(2.0 * target * (1.0 - target))
    lo, hi = 0.0, max(1.0, -_STD_NORMAL.inv_cdf(target))
    while _upper_tail(hi, df) > target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise NumericalError("t quantile bracket overflow")
    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = _upper_tail(x, df) - target
        if f > 0:
            lo = x
        else:
            hi = x
        dens = t_pdf(x, df)
        step = f / dens if dens > 0 else 0.0
        x_new = x + step
        if not (lo < x_new < hi) or dens == 0.0:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x_new)):
            x = x_new
            break
        x = x_new
    return sign * x


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def norm_sf2(x: float) -> float:
    """Two-sided normal tail ``P(|Z| > x)``."""
    return math.erfc(abs(x) / math.sqrt(2.0))


def norm_ppf(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ConfigError(f"probability must lie in (0, 1), got {p}")
    return _STD_NORMAL.inv_cdf(p)


def t_ppf_array(p: np.ndarray, df: float) -> np.ndarray:
    """Vectorised Student-t quantile for bulk sampling.

    Uses the inverse incomplete beta function from scipy; agrees with
    :func:`t_ppf` to ~1e-12 relative (checked in the test suite).
    """
    p = np.asarray(p, dtype=float)
    tail = np.minimum(p, 1.0 - p)
    y = _sp.betaincinv(0.5 * df, 0.5, 2.0 * tail)
    with np.errstate(divide="ignore"):
        mag = np.sqrt(df * (1.0 / y - 1.0))
    return np.where(p < 0.5, -mag, mag)
