"""Power transforms of return series and lagged covariance/correlation estimators.

All estimators work along the last axis, so a 2-D array of shape
``(n_series, T)`` (or a reshaped ``(..., q, T // q)`` group view) is handled in
one call.  The scalar wrappers (:func:`sample_cov_fg`, :func:`sample_corr_fg`,
:func:`dependence_estimate`) validate their input and raise on degeneracy; the
array-valued core returns ``nan`` instead so that batch Monte Carlo runs keep
going.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigError, DataError, DegenerateSeriesError, NumericalError

TransformKind = Literal["identity", "abs_power", "signed_power"]
Measure = Literal[
    "abs_power_autocov",
    "abs_power_autocorr",
    "signed_power_crosscov",
    "signed_power_crosscorr",
]
MEASURES: tuple[str, ...] = (
    "abs_power_autocov",
    "abs_power_autocorr",
    "signed_power_crosscov",
    "signed_power_crosscorr",
)

# |rho| may exceed one by rounding only; anything larger is a bug upstream.
_CLAMP_SLACK = 1e-9
_DEGENERATE_RTOL = 64 * np.finfo(float).eps


def as_series(x, name: str = "series") -> np.ndarray:
    """Validate ``x`` as a non-empty 1-D series of finite floats."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DataError(f"{name} is empty")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise DataError(f"{name} has a non-finite value at index {bad[0]}: {arr[bad[0]]}")
    return arr


@dataclass(frozen=True)
class TransformSpec:
    """Pointwise transform ``x -> x``, ``|x|^p`` or ``|x|^s sign(x)``."""

    kind: TransformKind = "identity"
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in ("identity", "abs_power", "signed_power"):
            raise ConfigError(f"unknown transform kind {self.kind!r}")
        if not (np.isfinite(self.exponent) and self.exponent > 0):
            raise ConfigError(f"transform exponent must be positive, got {self.exponent}")

    @classmethod
    def identity(cls) -> "TransformSpec":
        return cls("identity", 1.0)

    @classmethod
    def abs_power(cls, p: float) -> "TransformSpec":
        return cls("abs_power", float(p))

    @classmethod
    def signed_power(cls, s: float) -> "TransformSpec":
        return cls("signed_power", float(s))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return x
        a = np.abs(x)
        if self.exponent != 1.0:
            a = a**self.exponent
        if self.kind == "abs_power":
            return a
        return np.sign(x) * a

    @property
    def label(self) -> str:
        if self.kind == "identity":
            return "R"
        if self.kind == "abs_power":
            return f"|R|^{self.exponent:g}"
        return f"|R|^{self.exponent:g}sign(R)"


@dataclass(frozen=True)
class DependenceSpec:
    """Which dependence measure to estimate.

    ``abs_power_*`` pairs ``|R_t|^p`` with ``|R_{t-h}|^p``; ``signed_power_*``
    pairs ``R_t`` with ``|R_{t-h}|^s sign(R_{t-h})``.
    """

    measure: Measure
    exponent: float
    lag: int = 1

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ConfigError(f"unknown measure {self.measure!r}; expected one of {MEASURES}")
        if not (np.isfinite(self.exponent) and self.exponent > 0):
            raise ConfigError(f"exponent must be positive, got {self.exponent}")
        if int(self.lag) != self.lag:
            raise ConfigError(f"lag must be an integer, got {self.lag}")
        object.__setattr__(self, "lag", int(self.lag))
        min_lag = 1 if self.is_correlation else 0
        if self.lag < min_lag:
            raise ConfigError(f"{self.measure} needs lag >= {min_lag}, got {self.lag}")

    @property
    def is_correlation(self) -> bool:
        return self.measure.endswith("corr")

    @property
    def f(self) -> TransformSpec:
        if self.measure.startswith("abs_power"):
            return TransformSpec.abs_power(self.exponent)
        return TransformSpec.identity()

    @property
    def g(self) -> TransformSpec:
        if self.measure.startswith("abs_power"):
            return TransformSpec.abs_power(self.exponent)
        return TransformSpec.signed_power(self.exponent)

    @property
    def label(self) -> str:
        kind = "rho" if self.is_correlation else "gamma"
        return f"{kind}[{self.f.label},{self.g.label}]({self.lag})"


def transform(x, spec: TransformSpec) -> np.ndarray:
    """Apply ``spec`` to every element of the series ``x``."""
    return spec(as_series(x))


def _mean(a: np.ndarray) -> np.ndarray:
    # one refinement pass on top of numpy's pairwise summation
    m = a.mean(axis=-1, keepdims=True)
    return m + (a - m).mean(axis=-1, keepdims=True)


def sample_mean(x) -> float:
    """Arithmetic mean of a non-empty series."""
    return float(_mean(as_series(x))[0])


def lag_moments(fx: np.ndarray, gx: np.ndarray, h: int):
    """Return ``(cov_fg(h), var_f, var_g)`` along the last axis.

    ``cov_fg(h) = (1/T) sum_{t=h+1}^T (f_t - mean f)(g_{t-h} - mean g)`` with
    full-sample means and divisor ``T``; the variances use the same divisor.
    """
    T = fx.shape[-1]
    df = fx - _mean(fx)
    dg = gx - _mean(gx)
    cov = (df[..., h:] * dg[..., : T - h]).sum(axis=-1) / T
    var_f = (df * df).sum(axis=-1) / T
    var_g = (dg * dg).sum(axis=-1) / T
    return cov, var_f, var_g


def _degenerate(var: np.ndarray, z: np.ndarray) -> np.ndarray:
    scale = np.abs(z).max(axis=-1)
    return var <= (_DEGENERATE_RTOL * scale) ** 2


def _rescale(z: np.ndarray) -> np.ndarray:
    # correlations are scale-free; unit max-abs keeps the moments away from under/overflow
    scale = np.abs(z).max(axis=-1, keepdims=True)
    return z / np.where(scale > 0, scale, 1.0)


def corr_from_moments(cov, var_f, var_g, fx, gx):
    """Correlation with degenerate entries set to ``nan`` and rounding overshoot clamped."""
    bad = _degenerate(var_f, fx) | _degenerate(var_g, gx)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = cov / np.sqrt(var_f * var_g)
    rho = np.where(bad, np.nan, rho)
    over = np.abs(rho) > 1.0
    if np.any(over):
        if np.any(np.abs(rho[over]) > 1.0 + _CLAMP_SLACK):
            raise NumericalError("correlation estimate exceeds 1 beyond rounding slack")
        rho = np.clip(rho, -1.0, 1.0)
    return rho


def estimates(x: np.ndarray, spec: DependenceSpec) -> np.ndarray:
    """Vectorised estimator of ``spec`` along the last axis of ``x``.

    Degenerate rows (zero variance of a transformed series) give ``nan`` for
    correlation measures.  No input validation.
    """
    fx = spec.f(x)
    gx = fx if spec.f == spec.g else spec.g(x)
    if spec.is_correlation:
        fx, gx = _rescale(fx), _rescale(gx)
        return corr_from_moments(*lag_moments(fx, gx, spec.lag), fx, gx)
    cov, var_f, var_g = lag_moments(fx, gx, spec.lag)
    bad = _degenerate(var_f, fx) | _degenerate(var_g, gx)
    return np.where(bad, np.nan, cov)


def _check_lag(T: int, h: int, min_lag: int = 0) -> int:
    if int(h) != h or h < min_lag:
        raise ConfigError(f"lag must be an integer >= {min_lag}, got {h}")
    if h >= T:
        raise DataError(f"lag {h} requires more than {h} observations, got T={T}")
    return int(h)


def sample_cov_fg(x, f: TransformSpec, g: TransformSpec, h: int) -> float:
    """Sample covariance of ``f(x_t)`` and ``g(x_{t-h})`` (divisor ``T``)."""
    x = as_series(x)
    h = _check_lag(x.size, h)
    cov, _, _ = lag_moments(f(x), g(x), h)
    return float(cov)


def sample_corr_fg(x, f: TransformSpec, g: TransformSpec, h: int) -> float:
    """Sample correlation of ``f(x_t)`` and ``g(x_{t-h})`` for ``h >= 1``."""
    x = as_series(x)
    h = _check_lag(x.size, h, min_lag=1)
    fx, gx = _rescale(f(x)), _rescale(g(x))
    rho = corr_from_moments(*lag_moments(fx, gx, h), fx, gx)
    if np.isnan(rho):
        raise DegenerateSeriesError("transformed series has zero sample variance")
    return float(rho)


def dependence_estimate(x, spec: DependenceSpec) -> float:
    """Full-sample estimate of the measure described by ``spec``."""
    if spec.is_correlation:
        return sample_corr_fg(x, spec.f, spec.g, spec.lag)
    return sample_cov_fg(x, spec.f, spec.g, spec.lag)
