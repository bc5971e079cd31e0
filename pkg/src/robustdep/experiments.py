"""Monte Carlo harness: size, size-adjusted power and CI coverage studies.

Replications are simulated in fixed-size chunks.  Each chunk is a pure
function of ``(dgp, replication range)`` because every path draws from its
own counter-based stream, and chunk results are concatenated in index order,
so the output does not depend on how many worker processes run the chunks.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__, dgp as dgp_mod, groups, hac
from .dgp import DgpSpec, InnovationDist
from .errors import ConfigError
from .io import format_float
from .mac import batch_mac, mac_from_correlations, mac_group_test, mac_hac_test, mac_statistic, mac_weights  # noqa: F401
from .series import DependenceSpec
from .special import norm_ppf

HAC_METHOD = "hac_qs"
HAC_BARTLETT = "hac_bartlett"
GROUP_QS = (4, 8, 12, 16)
DEFAULT_METHODS = (HAC_METHOD,) + tuple(f"group_t(q={q})" for q in GROUP_QS)
MIN_REPLICATIONS = 100
DESK_REPLICATIONS = 2000
FULL_REPLICATIONS = 10_000
TRUTH_SEED = 0x7A11_5EED
_GROUP_RE = re.compile(r"^group_t\(q=(\d+)\)$")


def group_method(q: int) -> str:
    return f"group_t(q={q})"


def parse_method(method: str):
    """``("hac", kernel_kind)`` or ``("group", q)``."""
    if method == HAC_METHOD:
        return "hac", "quadratic_spectral"
    if method == HAC_BARTLETT:
        return "hac", "bartlett"
    m = _GROUP_RE.match(method)
    if m and int(m.group(1)) >= 2:
        return "group", int(m.group(1))
    raise ConfigError(
        f"unknown method {method!r}; use {HAC_METHOD!r}, {HAC_BARTLETT!r} or 'group_t(q=<int>)'"
    )


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo study.

    ``dgp`` is the template (its ``T`` and ``seed`` are the sample length and
    base seed); grid studies override ``phi`` or ``alpha`` per grid point.
    Several dependence measures share the same simulated paths.
    """

    dgp: DgpSpec
    specs: tuple[DependenceSpec, ...]
    methods: tuple[str, ...] = DEFAULT_METHODS
    replications: int = DESK_REPLICATIONS
    nominal_level: float = 0.05
    chunk_size: int = 250
    workers: int = 1

    def __post_init__(self):
        specs = self.specs
        if isinstance(specs, DependenceSpec):
            specs = (specs,)
        specs = tuple(specs)
        if not specs:
            raise ConfigError("at least one dependence measure is required")
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            kind, q = parse_method(m)
            if kind == "group":
                for spec in specs:
                    groups.partition(self.dgp.T, q, max_lag=spec.lag)
        if int(self.replications) != self.replications or self.replications < MIN_REPLICATIONS:
            raise ConfigError(f"replications must be an integer >= {MIN_REPLICATIONS}, got {self.replications}")
        if not 0.0 < self.nominal_level < 1.0:
            raise ConfigError(f"nominal_level must lie in (0, 1), got {self.nominal_level}")
        if int(self.chunk_size) != self.chunk_size or self.chunk_size < 1:
            raise ConfigError(f"chunk_size must be a positive integer, got {self.chunk_size}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers}")

    def replace(self, **changes) -> "McConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = self.dgp
        return {
            "dgp": {
                "phi": d.phi, "omega": d.omega, "alpha": d.alpha, "beta": d.beta,
                "innovation": {"kind": d.innovation.kind, "eta": _json_float(d.innovation.eta),
                               "lam": d.innovation.lam},
                "T": d.T, "burn_in": d.burn_in, "seed": d.seed,
            },
            "specs": [{"measure": s.measure, "exponent": s.exponent, "lag": s.lag} for s in self.specs],
            "methods": list(self.methods),
            "replications": self.replications,
            "nominal_level": self.nominal_level,
            "chunk_size": self.chunk_size,
        }


def _json_float(v: float):
    return v if math.isfinite(v) else str(v)


@dataclass(frozen=True)
class McRow:
    study: str
    dgp: str
    grid_name: str
    grid_value: float
    measure: str
    method: str
    frequency: float
    mc_se: float
    n_rep: int
    critical_value: float
    truth: float = math.nan
    n_degenerate: int = 0


CSV_FIELDS = tuple(f.name for f in dataclasses.fields(McRow))


@dataclass
class McSummary:
    study: str
    config: McConfig
    rows: list[McRow] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def select(self, **match) -> list[McRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in match.items())]

    def get(self, **match) -> McRow:
        found = self.select(**match)
        if len(found) != 1:
            raise KeyError(f"{len(found)} rows match {match}")
        return found[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.rows:
            w.writerow([format_float(v) if isinstance(v, float) else v
                        for v in dataclasses.astuple(r)])
        return buf.getvalue()

    def manifest(self) -> dict:
        return {
            "study": self.study,
            "package_version": __version__,
            "config": self.config.to_dict(),
            "seeds": {"base_seed": self.config.dgp.seed,
                      "replication_streams": "philox(key=(base_seed, replication_index))"},
            **self.extra,
        }


def mc_se(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n) if n > 0 and not math.isnan(p) else math.nan


# -- statistics for one chunk -------------------------------------------------

def _chunk_statistics(dgp: DgpSpec, specs, beta0s, methods, start: int, stop: int) -> np.ndarray:
    """``t`` statistics, shape ``(n_specs, n_methods, stop - start)``."""
    X = dgp_mod.simulate_batch(dgp, range(start, stop))
    out = np.empty((len(specs), len(methods), stop - start))
    for i, (spec, b0) in enumerate(zip(specs, beta0s)):
        for j, method in enumerate(methods):
            kind, arg = parse_method(method)
            if kind == "hac":
                est, se, _ = hac.hac_rows(X, spec, arg)
                with np.errstate(invalid="ignore", divide="ignore"):
                    out[i, j] = (est - b0) / se
            else:
                est = groups.batch_group_estimates(X, spec, arg)
                out[i, j] = groups.batch_t_statistics(est, b0)
    return out


def _chunk_task(args):
    return _chunk_statistics(*args)


def _chunks(n: int, size: int) -> list[tuple[int, int]]:
    return [(a, min(a + size, n)) for a in range(0, n, size)]


def simulate_statistics(config: McConfig, dgp: DgpSpec, beta0s: Optional[Sequence[float]] = None) -> np.ndarray:
    """All replications' ``t`` statistics for ``dgp``: ``(n_specs, n_methods, replications)``."""
    if beta0s is None:
        beta0s = [0.0] * len(config.specs)
    tasks = [(dgp, config.specs, tuple(beta0s), config.methods, a, b)
             for a, b in _chunks(config.replications, config.chunk_size)]
    if config.workers == 1:
        parts = [_chunk_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_chunk_task, tasks))
    return np.concatenate(parts, axis=-1)


def nominal_critical_value(method: str, level: float) -> float:
    kind, arg = parse_method(method)
    if kind == "hac":
        return norm_ppf(1.0 - 0.5 * level)
    return groups.critical_value(arg, level)


def _rejections(t: np.ndarray, cv: float) -> tuple[float, int]:
    # nan statistics (degenerate replications) never reject
    bad = np.isnan(t)
    return float(np.mean(np.abs(np.where(bad, 0.0, t)) > cv)), int(bad.sum())


# -- studies ----------------------------------------------------------------

def mc_size(config: McConfig, grid_name: str = "", grid_value: float = math.nan) -> McSummary:
    """Null rejection frequencies at the nominal level."""
    for spec in config.specs:
        if spec.measure.startswith("signed") and config.dgp.phi != 0.0:
            raise ConfigError(f"size study needs phi = 0 for {spec.label}, got phi = {config.dgp.phi}")
        if spec.measure.startswith("abs") and (config.dgp.alpha or config.dgp.beta or config.dgp.phi):
            raise ConfigError(f"{spec.label} is not zero under a dependent DGP; use mc_coverage")
    stats = simulate_statistics(config, config.dgp)
    summary = McSummary("size", config)
    n = config.replications
    for i, spec in enumerate(config.specs):
        for j, method in enumerate(config.methods):
            cv = nominal_critical_value(method, config.nominal_level)
            freq, bad = _rejections(stats[i, j], cv)
            summary.rows.append(McRow("size", config.dgp.innovation.label, grid_name, grid_value,
                                      spec.label, method, freq, mc_se(freq, n), n, cv, 0.0, bad))
    return summary


def mc_power_curve(config: McConfig, phi_grid: Sequence[float]) -> McSummary:
    """Size-adjusted rejection frequencies over ``phi`` (common random numbers across the grid).

    The critical value of each method is the empirical ``1 - level`` quantile
    of ``|t|`` at ``phi = 0``.
    """
    grid = [float(v) for v in phi_grid]
    if 0.0 not in grid:
        raise ConfigError("phi_grid must contain 0 for size adjustment")
    if any(not 0.0 <= v < 1.0 for v in grid):
        raise ConfigError(f"phi values must lie in [0, 1), got {grid}")
    for spec in config.specs:
        if not spec.measure.startswith("signed"):
            raise ConfigError("power curves are defined for signed-power (efficiency) measures")
    n = config.replications
    null = simulate_statistics(config, config.dgp.replace(phi=0.0))
    absnull = np.abs(np.nan_to_num(null, nan=0.0))
    cvs = np.quantile(absnull, 1.0 - config.nominal_level, axis=-1)
    summary = McSummary("power", config, extra={"size_adjustment": "empirical quantile of |t| at phi=0, same seeds"})
    for phi in sorted(set(grid)):
        stats = null if phi == 0.0 else simulate_statistics(config, config.dgp.replace(phi=phi))
        for i, spec in enumerate(config.specs):
            for j, method in enumerate(config.methods):
                freq, bad = _rejections(stats[i, j], float(cvs[i, j]))
                summary.rows.append(McRow("power", config.dgp.innovation.label, "phi", phi, spec.label,
                                          method, freq, mc_se(freq, n), n, float(cvs[i, j]), math.nan, bad))
    return summary


# -- population autocorrelation of |R|^p ------------------------------------------

def analytic_square_corr(alpha: float, h: int, dist: InnovationDist = InnovationDist.normal()) -> float:
    """``rho_{R^2}(h) = alpha^h`` for ARCH(1) when ``alpha^2 E[Z^4] < 1``; ``nan`` otherwise."""
    kurt = dist.expect(lambda z: z**4)
    return float(alpha**h) if alpha * alpha * kurt < 1.0 else math.nan


def _correlation_exists(alpha: float, p: float, dist: InnovationDist) -> bool:
    # Corr of |R|^p needs E|R|^{2p} < inf, i.e. 2p < zeta
    if alpha == 0.0:
        return dist.kind == "standard_normal" or 2 * p < dist.eta
    return 2.0 * p < dgp_mod.kesten_zeta(alpha, 0.0, dist)


@functools.lru_cache(maxsize=64)
def pilot_abs_power_corr(alpha: float, powers: tuple[float, ...], h: int = 1,
                         dist: InnovationDist = InnovationDist.normal(), n_obs: int = 10**7,
                         chains: int = 100, seed: int = TRUTH_SEED) -> tuple[float, ...]:
    """Plug-in ``rho_{|R|^p}(h)`` of ARCH(1) from ``n_obs`` simulated observations.

    The pilot runs ``chains`` independent paths (pooled moments, lag products
    within each path) so memory stays bounded.
    """
    per = n_obs // chains
    spec = DgpSpec(alpha=alpha, innovation=dist, T=per, seed=seed)
    k = len(powers)
    s1 = np.zeros(k)
    s2 = np.zeros(k)
    s12 = np.zeros(k)
    n_single = 0
    n_pairs = 0
    batch = 10
    for a in range(0, chains, batch):
        X = np.abs(dgp_mod.simulate_batch(spec, range(a, min(a + batch, chains))))
        for i, p in enumerate(powers):
            Y = X**p
            s1[i] += Y.sum()
            s2[i] += (Y * Y).sum()
            s12[i] += (Y[:, h:] * Y[:, :-h]).sum()
        n_single += X.size
        n_pairs += X.shape[0] * (per - h)
    m = s1 / n_single
    var = s2 / n_single - m * m
    cov = s12 / n_pairs - m * m
    return tuple(float(c / v) for c, v in zip(cov, var))


def true_abs_power_corr(alpha: float, p: float, h: int = 1,
                        dist: InnovationDist = InnovationDist.normal(), n_obs: int = 10**7,
                        pilot_powers: tuple[float, ...] = ()) -> float:
    """Population ``rho_{|R|^p}(h)`` under ARCH(1) (``phi = 0``), ``nan`` where undefined.

    Closed form for ``p = 2`` when fourth moments exist, otherwise a pilot
    simulation.  ``alpha = 0`` gives 0.  ``pilot_powers`` lets several
    powers share one (cached) pilot run.
    """
    if alpha == 0.0:
        return 0.0
    if not _correlation_exists(alpha, p, dist):
        return math.nan
    if p == 2.0:
        exact = analytic_square_corr(alpha, h, dist)
        if not math.isnan(exact):
            return exact
    powers = tuple(sorted(set(pilot_powers) | {float(p)}))
    return pilot_abs_power_corr(float(alpha), powers, h, dist, n_obs)[powers.index(float(p))]


def mc_coverage(config: McConfig, alpha_grid: Sequence[float], truth_obs: int = 10**7) -> McSummary:
    """Coverage of nominal ``1 - level`` CIs for ``rho_{|R|^p}(h)`` over the ARCH parameter."""
    for spec in config.specs:
        if spec.measure != "abs_power_autocorr":
            raise ConfigError(f"coverage studies need abs_power_autocorr measures, got {spec.measure}")
    grid = [float(a) for a in alpha_grid]
    if any(not 0.0 <= a < 1.0 for a in grid):
        raise ConfigError(f"alpha values must lie in [0, 1), got {grid}")
    n = config.replications
    summary = McSummary("coverage", config, extra={"truth": "analytic for p=2 when E R^4 < inf, else "
                                                   f"pilot simulation of {truth_obs} observations, seed {TRUTH_SEED}"})
    for alpha in grid:
        dgp = config.dgp.replace(alpha=alpha, phi=0.0, beta=0.0)
        truths = [true_abs_power_corr(alpha, s.exponent, s.lag, dgp.innovation, truth_obs,
                                      tuple(float(o.exponent) for o in config.specs if o.lag == s.lag))
                  for s in config.specs]
        stats = simulate_statistics(config, dgp, [0.0 if math.isnan(t) else t for t in truths])
        for i, spec in enumerate(config.specs):
            for j, method in enumerate(config.methods):
                cv = nominal_critical_value(method, config.nominal_level)
                t = stats[i, j]
                bad = int(np.isnan(t).sum())
                if math.isnan(truths[i]):
                    freq = math.nan
                else:
                    freq = float(np.mean(np.abs(t) <= cv))  # nan compares False: not covered
                summary.rows.append(McRow("coverage", dgp.innovation.label, "alpha", alpha, spec.label,
                                          method, freq, mc_se(freq, n), n, cv, float(truths[i]), bad))
    return summary


def concat(summaries: Iterable[McSummary], study: Optional[str] = None) -> McSummary:
    summaries = list(summaries)
    out = McSummary(study or summaries[0].study, summaries[0].config, extra=dict(summaries[0].extra))
    for s in summaries:
        out.rows.extend(s.rows)
    return out


def write_outputs(summary: McSummary, csv_path, manifest_path=None, extra_manifest: Optional[dict] = None) -> None:
    with open(csv_path, "w", newline="") as fh:
        fh.write(summary.to_csv())
    if manifest_path is not None:
        man = summary.manifest()
        if extra_manifest:
            man.update(extra_manifest)
        with open(manifest_path, "w") as fh:
            json.dump(man, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
