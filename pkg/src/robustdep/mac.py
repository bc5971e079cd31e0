"""Multi-period autocorrelation MAC(H).

``MAC(H) = sum_h w_h rho'_{R, |R|^s sign(R)}(h)`` over ``h = 1..H``.  Two weight
presets are provided: ``equal`` (``1/H``) and ``variance_ratio``
(``2 (1 - h/(H+1))``, the weights that map autocorrelations into a
variance-ratio statistic).
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

from . import groups, hac, series
from .errors import ConfigError, DataError, DegenerateSeriesError, NumericalError
from .series import DependenceSpec
from .special import norm_ppf, norm_sf2

WeightsLike = Union[str, Sequence[float], np.ndarray]

WEIGHT_PRESETS = ("equal", "variance_ratio")


def mac_weights(weights: WeightsLike, H: int) -> np.ndarray:
    """Resolve a preset name or explicit sequence into ``H`` finite weights."""
    if int(H) != H or H < 1:
        raise ConfigError(f"H must be a positive integer, got {H}")
    H = int(H)
    if isinstance(weights, str):
        h = np.arange(1, H + 1, dtype=float)
        if weights == "equal":
            return np.full(H, 1.0 / H)
        if weights == "variance_ratio":
            return 2.0 * (1.0 - h / (H + 1))
        raise ConfigError(f"unknown weight preset {weights!r}; choose from {WEIGHT_PRESETS}")
    w = np.asarray(weights, dtype=float)
    if w.shape != (H,):
        raise ConfigError(f"expected {H} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ConfigError("weights must be finite")
    return w


def mac_from_correlations(rhos, weights) -> float:
    rhos = np.asarray(rhos, dtype=float)
    return float(np.dot(mac_weights(weights, rhos.size), rhos))


def _specs(H: int, s: float) -> list[DependenceSpec]:
    return [DependenceSpec("signed_power_crosscorr", s, h) for h in range(1, H + 1)]


def batch_mac(x: np.ndarray, H: int, weights: WeightsLike = "equal", s: float = 1.0) -> np.ndarray:
    """MAC(H) along the last axis; ``nan`` for degenerate rows."""
    w = mac_weights(weights, H)
    total = np.zeros(x.shape[:-1])
    for wh, spec in zip(w, _specs(H, s)):
        total = total + wh * series.estimates(x, spec)
    return total


def mac_statistic(x, H: int = 5, weights: WeightsLike = "equal", s: float = 1.0) -> float:
    x = series.as_series(x)
    if x.size <= H + 1:
        raise DataError(f"MAC({H}) needs more than {H + 1} observations, got {x.size}")
    value = float(batch_mac(x, H, weights, s))
    if math.isnan(value):
        raise DegenerateSeriesError("MAC statistic undefined: zero sample variance")
    return value


def mac_group_test(x, H: int = 5, weights: WeightsLike = "equal", s: float = 1.0, q: int = 8,
                   beta0: float = 0.0, level: float = 0.95) -> groups.GroupTestResult:
    """Group t-test on the within-group MAC(H) values."""
    x = series.as_series(x)
    part = groups.partition(x.size, q, max_lag=H)
    est = batch_mac(groups.group_view(x, q), H, weights, s)
    bad = np.flatnonzero(np.isnan(est))
    if bad.size:
        raise DegenerateSeriesError(f"group {bad[0] + 1} of {q} has zero sample variance")
    return groups.group_test_from_estimates(est, beta0, level, part.discarded)


def mac_hac_test(x, H: int = 5, weights: WeightsLike = "equal", s: float = 1.0,
                 kernel: hac.KernelSpec = hac.KernelSpec(), beta0: float = 0.0,
                 level: float = 0.95) -> hac.HacResult:
    """HAC t-test for MAC(H): weighted sum of the delta-method influence series.

    The per-lag influence series are aligned on ``t = H+1..T`` before summing;
    the automatic bandwidth is chosen on the stacked per-lag summands.
    """
    x = series.as_series(x)
    if x.size <= H + 10:
        raise DataError(f"HAC MAC test needs more than {H + 10} observations, got {x.size}")
    w = mac_weights(weights, H)
    T = x.size
    estimate = 0.0
    n = T - H
    u = np.zeros(n)
    stack = []
    for wh, spec in zip(w, _specs(H, s)):
        fx, gx = spec.f(x), spec.g(x)
        Y, V1, V2, cov, vf, vg = hac.summand_components(fx, gx, spec.lag)
        rho = series.corr_from_moments(cov, vf, vg, fx, gx)
        if np.isnan(rho):
            raise DegenerateSeriesError("MAC statistic undefined: zero sample variance")
        estimate += wh * float(rho)
        u = u + wh * hac._delta_combination(Y, V1, V2, cov, vf, vg)[-n:]
        stack.append(Y[-n:])
    stack += [V1[-n:], V2[-n:]]
    if kernel.bandwidth is not None:
        bw = kernel.bandwidth
    else:
        # bandwidth of the stacked (Y_1..Y_H, V1, V2) long-run covariance matrix
        bw = float(hac.stacked_bandwidth(np.stack(stack), kernel.kind))
        if math.isnan(bw):
            raise NumericalError("AR(1) plug-in coefficient at the unit root")
    lrv = float(hac.lrv_rows(u[None, :], np.array([bw]), kernel.kind)[0])
    if math.isnan(lrv):
        raise NumericalError("long-run variance undefined")
    se = math.sqrt(max(lrv, hac.LRV_FLOOR) / T)
    t = (estimate - beta0) / se
    z = norm_ppf(0.5 + 0.5 * level)
    return hac.HacResult(
        estimate=estimate, std_err=se, t_stat=t, p_value=norm_sf2(t),
        ci=(estimate - z * se, estimate + z * se), bandwidth_used=float(bw),
        beta0=float(beta0), level=float(level), kernel=kernel.kind,
    )
