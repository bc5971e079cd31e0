"""AR-ARCH/GARCH simulation and the Kesten tail index.

The simulated process is

    R_t = phi R_{t-1} + eps_t,   eps_t = sigma_t Z_t,
    sigma_t^2 = omega + alpha eps_{t-1}^2 + beta sigma_{t-1}^2,

with i.i.d. unit-variance innovations Z_t that are either standard normal or
Hansen's standardized skewed Student-t.  Innovations are drawn by inverse CDF
from a counter-based stream keyed by ``(seed, replication)``.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numba
import numpy as np
from scipy import integrate, optimize
from scipy import special as _sp

from . import rng
from .errors import ConfigError, NumericalError
from .special import t_ppf_array

InnovationKind = Literal["standard_normal", "skewed_t"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class InnovationDist:
    """Zero-mean, unit-variance innovation law.

    ``skewed_t`` is the density of Hansen (1994) with ``eta`` degrees of
    freedom and skewness ``lam``; ``eta > 2`` so the variance exists.
    """

    kind: InnovationKind = "standard_normal"
    eta: float = math.inf
    lam: float = 0.0

    def __post_init__(self):
        if self.kind == "standard_normal":
            object.__setattr__(self, "eta", math.inf)
            object.__setattr__(self, "lam", 0.0)
        elif self.kind == "skewed_t":
            if not (self.eta > 2 and math.isfinite(self.eta)):
                raise ConfigError(f"skewed-t needs finite eta > 2, got {self.eta}")
            if not -1 < self.lam < 1:
                raise ConfigError(f"skewed-t needs lambda in (-1, 1), got {self.lam}")
        else:
            raise ConfigError(f"unknown innovation kind {self.kind!r}")

    @classmethod
    def normal(cls) -> "InnovationDist":
        return cls("standard_normal")

    @classmethod
    def skewed_t(cls, eta: float, lam: float) -> "InnovationDist":
        return cls("skewed_t", float(eta), float(lam))

    @property
    def label(self) -> str:
        if self.kind == "standard_normal":
            return "N(0,1)"
        return f"t({self.eta:g},{self.lam:g})"

    @functools.cached_property
    def hansen_constants(self) -> tuple[float, float, float]:
        """``(a, b, c)`` of the skewed-t density."""
        eta, lam = self.eta, self.lam
        c = math.exp(math.lgamma(0.5 * (eta + 1)) - math.lgamma(0.5 * eta)) / math.sqrt(
            math.pi * (eta - 2)
        )
        a = 4.0 * lam * c * (eta - 2) / (eta - 1)
        b = math.sqrt(1.0 + 3.0 * lam * lam - a * a)
        return a, b, c

    @property
    def mode_split(self) -> float:
        """The point ``-a/b`` where the skewed-t switches scale (0 for the normal)."""
        if self.kind == "standard_normal":
            return 0.0
        a, b, _ = self.hansen_constants
        return -a / b

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "standard_normal":
            return np.exp(-0.5 * z * z) / _SQRT_2PI
        a, b, c = self.hansen_constants
        eta, lam = self.eta, self.lam
        scale = np.where(z < -a / b, 1.0 - lam, 1.0 + lam)
        y = (b * z + a) / scale
        return b * c * (1.0 + y * y / (eta - 2)) ** (-0.5 * (eta + 1))

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "standard_normal":
            return _sp.ndtr(z)
        a, b, _ = self.hansen_constants
        eta, lam = self.eta, self.lam
        k = math.sqrt(eta / (eta - 2))
        left = z < -a / b
        scale = np.where(left, 1.0 - lam, 1.0 + lam)
        w = k * (b * z + a) / scale
        tw = _sp.stdtr(eta, w)
        return np.where(left, (1.0 - lam) * tw, 0.5 * (1.0 - lam) + (1.0 + lam) * (tw - 0.5))

    def ppf(self, u):
        """Inverse CDF, vectorised over ``u`` in (0, 1)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "standard_normal":
            return _sp.ndtri(u)
        a, b, _ = self.hansen_constants
        eta, lam = self.eta, self.lam
        split = 0.5 * (1.0 - lam)
        left = u < split
        prob = np.where(left, u / (1.0 - lam), 0.5 + (u - split) / (1.0 + lam))
        w = t_ppf_array(prob, eta)
        scale = np.where(left, 1.0 - lam, 1.0 + lam)
        return (scale * math.sqrt((eta - 2) / eta) * w - a) / b

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.open_uniform(gen, n))

    def expect(self, func: Callable[[float], float], **quad_kw) -> float:
        """``E[func(Z)]`` by adaptive Gauss-Kronrod quadrature.

        The real line is split at 0 and at the skewed-t kink; the two
        unbounded pieces go through QUADPACK's bounded-interval substitution.
        """
        opts = {"epsabs": 1e-13, "epsrel": 1e-12, "limit": 500}
        opts.update(quad_kw)
        knots = sorted({0.0, self.mode_split})

        def integrand(z):
            return func(z) * float(self.pdf(z))

        total = integrate.quad(integrand, -math.inf, knots[0], **opts)[0]
        for lo, hi in zip(knots[:-1], knots[1:]):
            total += integrate.quad(integrand, lo, hi, **opts)[0]
        total += integrate.quad(integrand, knots[-1], math.inf, **opts)[0]
        return total


def sample_innovation(dist: InnovationDist, gen: np.random.Generator) -> float:
    """A single draw from ``dist``."""
    return float(dist.sample(gen, 1)[0])


@functools.lru_cache(maxsize=256)
def log_moment(alpha: float, beta: float, dist: InnovationDist) -> float:
    """``E[log(alpha Z^2 + beta)]``; negative iff the volatility recursion is stationary."""
    if beta == 0.0:
        if alpha <= 0.0:
            return -math.inf
        return math.log(alpha) + dist.expect(lambda z: math.log(z * z) if z != 0.0 else 0.0)
    return dist.expect(lambda z: math.log(alpha * z * z + beta))


@dataclass(frozen=True)
class DgpSpec:
    """Full description of a simulated AR(1)-GARCH(1,1) series."""

    phi: float = 0.0
    omega: float = 0.1
    alpha: float = 0.0
    beta: float = 0.0
    innovation: InnovationDist = dataclasses.field(default_factory=InnovationDist.normal)
    T: int = 5000
    burn_in: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.phi < 1.0:
            raise ConfigError(f"phi must lie in [0, 1), got {self.phi}")
        if not self.omega > 0.0:
            raise ConfigError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ConfigError(f"alpha and beta must be non-negative, got {self.alpha}, {self.beta}")
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError(f"T must be a positive integer, got {self.T}")
        if int(self.burn_in) != self.burn_in or self.burn_in < 0:
            raise ConfigError(f"burn_in must be a non-negative integer, got {self.burn_in}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "burn_in", int(self.burn_in))
        object.__setattr__(self, "seed", int(self.seed))
        if self.alpha > 0.0 or self.beta > 0.0:
            lm = log_moment(float(self.alpha), float(self.beta), self.innovation)
            if not lm < 0.0:
                raise ConfigError(
                    f"volatility recursion is not stationary: E[log(alpha Z^2 + beta)] = {lm:.6g} >= 0"
                )

    def replace(self, **changes) -> "DgpSpec":
        return dataclasses.replace(self, **changes)

    @property
    def sigma2_0(self) -> float:
        persistence = self.alpha + self.beta
        return self.omega / (1.0 - persistence) if persistence < 1.0 else self.omega


@numba.njit(cache=True)
def _ar_arch_path(z, phi, omega, alpha, beta, sigma2_0, burn_in, out):
    s2 = sigma2_0
    r = 0.0
    for t in range(z.shape[0]):
        eps = math.sqrt(s2) * z[t]
        r = phi * r + eps
        if t >= burn_in:
            out[t - burn_in] = r
        s2 = omega + alpha * eps * eps + beta * s2


def _simulate_into(spec: DgpSpec, replication: int, out: np.ndarray) -> None:
    z = spec.innovation.sample(rng.stream(spec.seed, replication), spec.burn_in + spec.T)
    _ar_arch_path(
        z, float(spec.phi), float(spec.omega), float(spec.alpha), float(spec.beta),
        spec.sigma2_0, spec.burn_in, out,
    )


def simulate_ar_arch(spec: DgpSpec, replication: int = 0) -> np.ndarray:
    """One simulated path of length ``spec.T`` (after burn-in).

    The result is a pure function of ``(spec, replication)``.
    """
    out = np.empty(spec.T)
    _simulate_into(spec, replication, out)
    return out


def simulate_batch(spec: DgpSpec, replications: Sequence[int]) -> np.ndarray:
    """Stack of paths, one row per replication index."""
    out = np.empty((len(replications), spec.T))
    for row, rep in enumerate(replications):
        _simulate_into(spec, int(rep), out[row])
    return out


def kesten_moment(zeta: float, alpha: float, beta: float, dist: InnovationDist) -> float:
    """``E[(alpha Z^2 + beta)^(zeta/2)]`` (``inf`` when the moment does not exist)."""
    if dist.kind == "skewed_t" and zeta >= dist.eta:
        return math.inf
    half = 0.5 * zeta
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return dist.expect(lambda z: (alpha * z * z + beta) ** half)


def kesten_zeta(alpha: float, beta: float, dist: InnovationDist, xtol: float = 1e-12) -> float:
    """Tail index: the positive root of ``E[(alpha Z^2 + beta)^(zeta/2)] = 1``."""
    if not alpha > 0.0 or beta < 0.0:
        raise ConfigError(f"kesten_zeta needs alpha > 0 and beta >= 0, got {alpha}, {beta}")
    if not log_moment(float(alpha), float(beta), dist) < 0.0:
        raise ConfigError("E[log(alpha Z^2 + beta)] >= 0: no stationary solution, no tail index")

    def excess(zeta):
        return kesten_moment(zeta, alpha, beta, dist) - 1.0

    lo = 1e-3
    f_lo = excess(lo)
    if not f_lo < 0.0:
        raise NumericalError(f"no sign change: E[.]-1 = {f_lo:.3g} at zeta={lo}")
    cap = 64.0
    if dist.kind == "skewed_t":
        # moments of order >= eta diverge, so the root lies below eta
        cap = min(cap, dist.eta * (1.0 - 1e-6))
    hi = 1.0
    f_hi = excess(hi)
    while f_hi < 0.0:
        if hi >= cap:
            raise NumericalError(
                f"no sign change on [{lo}, {cap:g}]: E[.]-1 = {f_lo:.3g} and {f_hi:.3g} at the endpoints"
            )
        lo, f_lo = hi, f_hi
        hi = min(2.0 * hi, cap)
        f_hi = excess(hi)
    return optimize.brentq(excess, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
