"""Rank-size tail-index estimation and the moment-based choice of power.

The tail index of ``|x|`` is estimated from the ``k`` largest observations by
the bias-corrected log-log rank-size regression: regress
``log(rank - 1/2)`` on ``log(size)``; ``zeta = -slope`` with standard error ``zeta * sqrt(2/k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import series
from .errors import ConfigError, DataError

MIN_TAIL_OBS = 10
CI_Z = 1.96

#: (lower endpoint threshold, power) pairs, checked from the top down
POWER_RULE = ((3.0, 0.5), (2.5, 0.25), (2.2, 0.1))


@dataclass(frozen=True)
class TailEstimate:
    zeta_hat: float
    std_err: float
    ci: tuple[float, float]
    k_used: int
    intercept: float
    tail: str = "abs"


def _ols_slope(xv: np.ndarray, yv: np.ndarray) -> tuple[float, float]:
    xm, ym = xv.mean(), yv.mean()
    dx = xv - xm
    slope = float((dx * (yv - ym)).sum() / (dx * dx).sum())
    return slope, float(ym - slope * xm)


def rank_size_zeta(x, tail_fraction: float = 0.05, k: Optional[int] = None) -> TailEstimate:
    """Tail index of ``|x|`` from its ``k = ceil(tail_fraction * T)`` largest values.

    Pass ``k`` to fix the number of order statistics directly.
    """
    x = series.as_series(x)
    if k is None:
        if not 0.0 < tail_fraction <= 0.5:
            raise ConfigError(f"tail_fraction must lie in (0, 0.5], got {tail_fraction}")
        k = math.ceil(tail_fraction * x.size)
    k = int(k)
    if k < MIN_TAIL_OBS:
        raise DataError(f"need at least {MIN_TAIL_OBS} tail observations, got k={k}")
    if k > x.size:
        raise DataError(f"k={k} exceeds the sample size {x.size}")
    sizes = np.sort(np.abs(x))[::-1][:k]
    if not sizes[-1] > 0.0:
        raise DataError("the tail sample contains zeros; log sizes are undefined")
    log_rank = np.log(np.arange(1, k + 1) - 0.5)
    slope, intercept = _ols_slope(np.log(sizes), log_rank)
    zeta = -slope
    if not zeta > 0.0:
        raise DataError(f"rank-size slope {slope:.4g} is not negative")
    se = zeta * math.sqrt(2.0 / k)
    return TailEstimate(
        zeta_hat=zeta,
        std_err=se,
        ci=(zeta - CI_Z * se, zeta + CI_Z * se),
        k_used=k,
        intercept=intercept,
    )


def select_power(ci_lower: float) -> Optional[float]:
    """Power ``s`` whose moment requirement ``2(1+s) < zeta`` the CI lower end supports.

    Returns ``None`` when ``ci_lower <= 2.2`` (too few moments for any power in
    the rule).  Interval endpoints belong to the lower interval.
    """
    if not ci_lower > 0.0:
        raise ConfigError(f"ci_lower must be positive, got {ci_lower}")
    for threshold, power in POWER_RULE:
        if ci_lower > threshold:
            return power
    return None


def moment_gate(power: float, kind: str) -> float:
    """Tail index the moment conditions need: ``4p`` for |R|^p, ``2(1+s)`` for signed powers."""
    if kind == "abs_power":
        return 4.0 * power
    if kind == "signed_power":
        return 2.0 * (1.0 + power)
    raise ConfigError(f"unknown power kind {kind!r}")
