"""HAC long-run variance and HAC t-tests for the dependence measures.

This is the comparison method: kernel-smoothed long-run variance (quadratic
spectral by default, Bartlett optional) with Andrews' AR(1) plug-in bandwidth,
standard-normal critical values, and delta-method standard errors for
correlations.  It is reproduced as practitioners run it, including in
settings where its moment conditions fail.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from . import series
from .errors import ConfigError, DataError, DegenerateSeriesError, NumericalError
from .series import DependenceSpec
from .special import norm_ppf, norm_sf2

KernelKind = Literal["quadratic_spectral", "bartlett"]

BANDWIDTH_FLOOR = 1e-3
LRV_FLOOR = 1e-12
_UNIT_ROOT_GAP = 1e-6
_QS_TRUNCATION = 10.0


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice; ``bandwidth=None`` selects it automatically (Andrews 1991, AR(1))."""

    kind: KernelKind = "quadratic_spectral"
    bandwidth: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("quadratic_spectral", "bartlett"):
            raise ConfigError(f"unknown kernel {self.kind!r}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigError(f"explicit bandwidth must be positive, got {self.bandwidth}")


def kernel_weight(kind: KernelKind, x):
    """Kernel weight ``k(x)``; vectorised."""
    x = np.abs(np.asarray(x, dtype=float))
    if kind == "bartlett":
        return np.maximum(0.0, 1.0 - x)
    if kind != "quadratic_spectral":
        raise ConfigError(f"unknown kernel {kind!r}")
    z = 6.0 * math.pi * x / 5.0
    small = z < 1e-2
    zs = np.where(small, 1.0, z)
    full = 3.0 / (zs * zs) * (np.sin(zs) / zs - np.cos(zs))
    # Taylor expansion avoids cancellation near 0
    series_ = 1.0 - z * z / 10.0 + z**4 / 280.0
    out = np.where(small, series_, full)
    return out if out.ndim else float(out)


def _demean(u: np.ndarray) -> np.ndarray:
    return u - u.mean(axis=-1, keepdims=True)


def ar1_coefficient(u: np.ndarray) -> np.ndarray:
    """Least-squares AR(1) coefficient of each (demeaned) row."""
    d = _demean(u)
    num = (d[..., 1:] * d[..., :-1]).sum(axis=-1)
    den = (d[..., :-1] * d[..., :-1]).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return num / den


def _bandwidth_from_rho(rho, T: int, kind: KernelKind):
    rho = np.asarray(rho, dtype=float)
    if kind == "quadratic_spectral":
        a2 = 4.0 * rho**2 / (1.0 - rho) ** 4
        bw = 1.3221 * (a2 * T) ** 0.2
    else:
        a1 = 4.0 * rho**2 / ((1.0 - rho) ** 2 * (1.0 + rho) ** 2)
        bw = 1.1447 * (a1 * T) ** (1.0 / 3.0)
    bw = np.maximum(bw, BANDWIDTH_FLOOR)
    return np.where(np.abs(rho) >= 1.0 - _UNIT_ROOT_GAP, np.nan, bw)


def andrews_bandwidth(y, kind: KernelKind = "quadratic_spectral") -> float:
    """Andrews (1991) AR(1) plug-in bandwidth for the series ``y``."""
    y = series.as_series(y, "summand series")
    if y.size < 10:
        raise DataError(f"automatic bandwidth needs T >= 10, got {y.size}")
    rho = float(ar1_coefficient(y))
    if not abs(rho) < 1.0 - _UNIT_ROOT_GAP:
        raise NumericalError(f"AR(1) plug-in coefficient {rho:.6g} is at the unit root")
    return float(_bandwidth_from_rho(rho, y.size, kind))


def _max_lag(bandwidth, T: int, kind: KernelKind):
    bw = np.nan_to_num(np.asarray(bandwidth, dtype=float), nan=0.0)
    if kind == "quadratic_spectral":
        lag = np.ceil(_QS_TRUNCATION * bw)
    else:
        lag = np.floor(bw)
    return np.minimum(T - 1, lag).astype(int)


def lrv_rows(u: np.ndarray, bandwidth: np.ndarray, kind: KernelKind) -> np.ndarray:
    """Scalar long-run variance of every row of ``u`` (no flooring).

    ``gamma(0) + 2 sum_k k(k / S) gamma(k)`` with 1/T-divisor autocovariances
    of the demeaned row, summed up to the truncation lag of each row.  Rows
    are processed independently, so results do not depend on batch layout.
    """
    u = np.atleast_2d(u)
    T = u.shape[-1]
    bandwidth = np.broadcast_to(np.asarray(bandwidth, dtype=float), u.shape[:-1])
    d = _demean(u)
    lrv = (d * d).sum(axis=-1) / T
    lags = _max_lag(bandwidth, T, kind)
    top = int(lags.max()) if lags.size else 0
    for k in range(1, top + 1):
        gamma_k = (d[..., k:] * d[..., : T - k]).sum(axis=-1) / T
        w = np.where(k <= lags, kernel_weight(kind, k / bandwidth), 0.0)
        lrv = lrv + 2.0 * w * gamma_k
    return np.where(np.isnan(bandwidth), np.nan, lrv)


def stacked_bandwidth(z: np.ndarray, kind: KernelKind) -> np.ndarray:
    """Andrews (1991) multivariate AR(1) plug-in bandwidth, unit weights.

    ``z`` has shape ``(..., d, T)``: ``d`` component series per row.  Rows
    with a component at the unit root give ``nan``.
    """
    T = z.shape[-1]
    rho = ar1_coefficient(z)
    d = _demean(z)
    resid = d[..., 1:] - rho[..., None] * d[..., :-1]
    s2 = (resid * resid).mean(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        den = (s2**2 / (1 - rho) ** 4).sum(axis=-1)
        if kind == "quadratic_spectral":
            num = (4 * rho**2 * s2**2 / (1 - rho) ** 8).sum(axis=-1)
            bw = 1.3221 * (num / den * T) ** 0.2
        else:
            num = (4 * rho**2 * s2**2 / ((1 - rho) ** 6 * (1 + rho) ** 2)).sum(axis=-1)
            bw = 1.1447 * (num / den * T) ** (1 / 3)
    bw = np.maximum(np.nan_to_num(bw, nan=0.0), BANDWIDTH_FLOOR)
    unit = np.any(np.abs(rho) >= 1.0 - _UNIT_ROOT_GAP, axis=-1) | np.isnan(rho).any(axis=-1)
    return np.where(unit, np.nan, bw)


def _andrews_multivariate(y: np.ndarray, kind: KernelKind) -> float:
    bw = float(stacked_bandwidth(y.T, kind))
    if np.isnan(bw):
        raise NumericalError("AR(1) plug-in coefficient at the unit root")
    return bw


def long_run_variance(y, kernel: KernelSpec = KernelSpec()):
    """Kernel long-run variance of a series (1-D) or covariance matrix of a ``(T, d)`` series.

    Non-positive scalar estimates are floored at ``1e-12`` with a
    ``RuntimeWarning``.
    """
    arr = np.asarray(y, dtype=float)
    if arr.size == 0:
        raise DataError("long-run variance of an empty series")
    if not np.all(np.isfinite(arr)):
        raise DataError("long-run variance input has non-finite values")
    if arr.ndim == 1:
        if arr.size < 2:
            raise DataError("long-run variance needs T >= 2")
        bw = kernel.bandwidth if kernel.bandwidth is not None else andrews_bandwidth(arr, kernel.kind)
        lrv = float(lrv_rows(arr[None, :], np.array([bw]), kernel.kind)[0])
        if not lrv > 0.0:
            warnings.warn(f"long-run variance {lrv:.3g} floored at {LRV_FLOOR}", RuntimeWarning)
            lrv = LRV_FLOOR
        return lrv
    if arr.ndim != 2:
        raise DataError(f"expected a 1-D or (T, d) array, got shape {arr.shape}")
    T = arr.shape[0]
    bw = kernel.bandwidth if kernel.bandwidth is not None else _andrews_multivariate(arr, kernel.kind)
    d = arr - arr.mean(axis=0)
    omega = d.T @ d / T
    for k in range(1, int(_max_lag(bw, T, kernel.kind)) + 1):
        w = kernel_weight(kernel.kind, k / bw)
        if w == 0.0:
            continue
        gk = d[k:].T @ d[: T - k] / T
        omega = omega + w * (gk + gk.T)
    return omega


def summand_components(fx: np.ndarray, gx: np.ndarray, h: int):
    """Centred summands of the covariance/variance estimators, aligned on ``t = h+1..T``.

    Returns ``(Y, V1, V2, cov, var_f, var_g)`` where ``Y_t = (f_t - mean f)(g_{t-h} - mean g)``,
    ``V1_t = (f_t - mean f)^2`` and ``V2_t = (g_t - mean g)^2`` (constants dropped:
    the long-run variance demeans anyway).
    """
    T = fx.shape[-1]
    df = fx - series._mean(fx)
    dg = gx - series._mean(gx)
    Y = df[..., h:] * dg[..., : T - h]
    V1 = (df * df)[..., h:]
    V2 = (dg * dg)[..., h:]
    cov = Y.sum(axis=-1) / T
    var_f = (df * df).sum(axis=-1) / T
    var_g = (dg * dg).sum(axis=-1) / T
    return Y, V1, V2, cov, var_f, var_g


def correlation_gradient(cov, var_f, var_g):
    """Gradient of ``x1 / sqrt(x2 x3)`` at the plug-in estimates."""
    root = np.sqrt(var_f * var_g)
    return 1.0 / root, -0.5 * cov / (var_f * root), -0.5 * cov / (var_g * root)


def influence_series(fx, gx, h: int, correlation: bool):
    """Linearised summand whose long-run variance over ``T`` is the estimator's variance."""
    Y, V1, V2, cov, var_f, var_g = summand_components(fx, gx, h)
    if not correlation:
        return Y, cov, var_f, var_g
    return _delta_combination(Y, V1, V2, cov, var_f, var_g), cov, var_f, var_g


def _delta_combination(Y, V1, V2, cov, var_f, var_g):
    with np.errstate(invalid="ignore", divide="ignore"):
        a1, a2, a3 = correlation_gradient(cov, var_f, var_g)
        return a1[..., None] * Y + a2[..., None] * V1 + a3[..., None] * V2


def hac_rows(x: np.ndarray, spec: DependenceSpec, kind: KernelKind = "quadratic_spectral",
             bandwidth: Optional[float] = None):
    """Batch HAC computation along the last axis: ``(estimate, std_err, bandwidth)``.

    Degenerate rows come back as ``nan``.
    """
    fx = spec.f(x)
    gx = spec.g(x)
    T = x.shape[-1]
    Y, V1, V2, cov, var_f, var_g = summand_components(fx, gx, spec.lag)
    if spec.is_correlation:
        est = series.corr_from_moments(cov, var_f, var_g, fx, gx)
        u = _delta_combination(Y, V1, V2, cov, var_f, var_g)
    else:
        bad = series._degenerate(var_f, fx) | series._degenerate(var_g, gx)
        est = np.where(bad, np.nan, cov)
        u = Y
    if bandwidth is not None:
        bw = np.full(u.shape[:-1], float(bandwidth))
    elif spec.is_correlation:
        # bandwidth of the stacked (Y, V1, V2) long-run covariance matrix
        bw = stacked_bandwidth(np.stack([Y, V1, V2], axis=-2), kind)
    else:
        bw = _bandwidth_from_rho(ar1_coefficient(u), u.shape[-1], kind)
    bw = np.where(np.isnan(est), np.nan, bw)
    u = np.where(np.isnan(bw)[..., None], 0.0, u)
    lrv = lrv_rows(u, bw, kind)
    se = np.sqrt(np.maximum(lrv, LRV_FLOOR) / T)
    return est, np.where(np.isnan(bw), np.nan, se), bw


@dataclass(frozen=True)
class HacResult:
    estimate: float
    std_err: float
    t_stat: float
    p_value: float
    ci: tuple[float, float]
    bandwidth_used: float
    beta0: float
    level: float
    kernel: str

    @property
    def method(self) -> str:
        return "hac_qs" if self.kernel == "quadratic_spectral" else "hac_bartlett"

    @property
    def reject(self) -> bool:
        return self.p_value < 1.0 - self.level


def hac_test(x, spec: DependenceSpec, beta0: float = 0.0, kernel: KernelSpec = KernelSpec(),
             level: float = 0.95) -> HacResult:
    """HAC t-test of ``H0: beta = beta0`` with standard-normal p-value and CI."""
    x = series.as_series(x)
    if x.size <= spec.lag + 10:
        raise DataError(f"HAC test needs more than {spec.lag + 10} observations, got {x.size}")
    est, se, bw = hac_rows(x[None, :], spec, kernel.kind, kernel.bandwidth)
    est, se, bw = float(est[0]), float(se[0]), float(bw[0])
    if math.isnan(est):
        raise DegenerateSeriesError("transformed series has zero sample variance")
    if math.isnan(bw):
        raise NumericalError("AR(1) plug-in coefficient at the unit root")
    t = (est - beta0) / se
    z = norm_ppf(0.5 + 0.5 * level)
    return HacResult(
        estimate=est,
        std_err=se,
        t_stat=t,
        p_value=norm_sf2(t),
        ci=(est - z * se, est + z * se),
        bandwidth_used=bw,
        beta0=float(beta0),
        level=float(level),
        kernel=kernel.kind,
    )
