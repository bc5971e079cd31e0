"""Per-instrument empirical pipeline.

For every instrument: tail index of ``|R|`` with its CI, the power ``s``
chosen from the CI lower end, efficiency tests of ``rho'_{R, |R|^s sign R}(h)``
(HAC and group t), MAC(H), and volatility-clustering CIs for
``rho_{|R|^p}(h)``.  Each test records whether the tail estimate supports
the moment condition it relies on.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from . import groups, hac, mac, series, tail
from .errors import ConfigError, RobustDepError
from .io import format_float
from .series import DependenceSpec

STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.10, "*"))


def stars(p_value: float) -> str:
    """``***`` below 1%, ``**`` below 5%, ``*`` below 10%."""
    for cut, mark in STAR_LEVELS:
        if p_value < cut:
            return mark
    return ""


@dataclass(frozen=True)
class EmpiricalConfig:
    h_efficiency: int = 1
    h_clustering: int = 5
    q: int = 8
    mac_H: int = 5
    mac_weights: str = "equal"
    tail_fraction: float = 0.05
    clustering_powers: tuple[float, ...] = (0.1, 0.25, 0.5, 1.0, 2.0)
    level: float = 0.95
    kernel: str = "quadratic_spectral"

    def __post_init__(self):
        for name in ("h_efficiency", "h_clustering", "q", "mac_H"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"config key '{name}': expected a positive integer, got {v!r}")
        if self.q < 2:
            raise ConfigError(f"config key 'q': need q >= 2, got {self.q}")
        mac.mac_weights(self.mac_weights, self.mac_H)
        if not 0.0 < self.tail_fraction <= 0.5:
            raise ConfigError(f"config key 'tail_fraction': must lie in (0, 0.5], got {self.tail_fraction}")
        object.__setattr__(self, "clustering_powers", tuple(float(p) for p in self.clustering_powers))
        if any(not p > 0 for p in self.clustering_powers):
            raise ConfigError("config key 'clustering_powers': powers must be positive")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"config key 'level': must lie in (0, 1), got {self.level}")
        hac.KernelSpec(self.kernel)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "EmpiricalConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known and key != "preset":
                raise ConfigError(f"config key '{key}': unknown key for the empirical preset")
        kw = {k: v for k, v in data.items() if k in known}
        if "clustering_powers" in kw:
            if not isinstance(kw["clustering_powers"], (list, tuple)):
                raise ConfigError("config key 'clustering_powers': expected a list")
            kw["clustering_powers"] = tuple(kw["clustering_powers"])
        try:
            return cls(**kw)
        except TypeError as err:
            raise ConfigError(f"empirical config: {err}") from None


@dataclass(frozen=True)
class TestRecord:
    measure: str
    method: str
    q: Optional[int]
    level: float
    estimate: float
    t_stat: float
    p_value: float
    ci_lower: float
    ci_upper: float
    stars: str
    validity: str
    moment_gate: float


@dataclass
class InstrumentReport:
    name: str
    n_obs: int
    tail: Optional[tail.TailEstimate] = None
    selected_s: Optional[float] = None
    power_rule: str = ""
    tests: list[TestRecord] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class EmpiricalReport:
    config: EmpiricalConfig
    instruments: list[InstrumentReport] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"config": dataclasses.asdict(self.config),
                "instruments": [dataclasses.asdict(r) for r in self.instruments]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        fields = ["instrument", "n_obs", "zeta_hat", "zeta_ci_lower", "zeta_ci_upper", "selected_s",
                  *[f.name for f in dataclasses.fields(TestRecord)], "error"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in self.instruments:
            head = [r.name, r.n_obs]
            if r.tail is not None:
                head += [_f(r.tail.zeta_hat), _f(r.tail.ci[0]), _f(r.tail.ci[1])]
            else:
                head += ["", "", ""]
            head.append("" if r.selected_s is None else _f(r.selected_s))
            if not r.tests:
                w.writerow(head + [""] * (len(fields) - len(head) - 1) + [r.error or ""])
            for t in r.tests:
                vals = [t.measure, t.method, "" if t.q is None else t.q, _f(t.level), _f(t.estimate),
                        _f(t.t_stat), _f(t.p_value), _f(t.ci_lower), _f(t.ci_upper), t.stars, t.validity,
                        _f(t.moment_gate)]
                w.writerow(head + vals + [r.error or ""])
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o).__name__)


def _f(v: float) -> str:
    return format_float(float(v))


def validity(gate: float, est: Optional[tail.TailEstimate]) -> str:
    if est is None:
        return "unknown"
    return "justified" if gate < est.ci[0] else "unjustified"


def _record(measure, method, q, res, gate, est) -> TestRecord:
    return TestRecord(measure=measure, method=method, q=q, level=res.level, estimate=float(
        res.pooled if isinstance(res, groups.GroupTestResult) else res.estimate),
        t_stat=float(res.t_stat), p_value=float(res.p_value), ci_lower=float(res.ci[0]),
        ci_upper=float(res.ci[1]), stars=stars(res.p_value), validity=validity(gate, est),
        moment_gate=gate)


def analyze_instrument(name: str, x, config: EmpiricalConfig) -> InstrumentReport:
    x = series.as_series(x, name)
    rep = InstrumentReport(name=name, n_obs=int(x.size))
    kernel = hac.KernelSpec(config.kernel)
    method_hac = "hac_qs" if config.kernel == "quadratic_spectral" else "hac_bartlett"
    method_grp = f"group_t(q={config.q})"
    rep.tail = tail.rank_size_zeta(x, config.tail_fraction)
    rep.selected_s = tail.select_power(rep.tail.ci[0])
    rep.power_rule = ("insufficient moments for the rule" if rep.selected_s is None
                      else f"s={rep.selected_s:g} (2(1+s) < {rep.tail.ci[0]:.4g})")
    powers = [1.0] + ([rep.selected_s] if rep.selected_s not in (None, 1.0) else [])
    for s in powers:
        spec = DependenceSpec("signed_power_crosscorr", s, config.h_efficiency)
        gate = tail.moment_gate(s, "signed_power")
        rep.tests.append(_record(spec.label, method_hac, None, hac.hac_test(x, spec, 0.0, kernel, config.level),
                                 gate, rep.tail))
        rep.tests.append(_record(spec.label, method_grp, config.q,
                                 groups.run_group_test(x, spec, config.q, 0.0, config.level), gate, rep.tail))
    s_mac = rep.selected_s if rep.selected_s is not None else 1.0
    label = f"MAC({config.mac_H},{config.mac_weights},s={s_mac:g})"
    gate = tail.moment_gate(s_mac, "signed_power")
    rep.tests.append(_record(label, method_hac, None, mac.mac_hac_test(
        x, config.mac_H, config.mac_weights, s_mac, kernel, 0.0, config.level), gate, rep.tail))
    rep.tests.append(_record(label, method_grp, config.q, mac.mac_group_test(
        x, config.mac_H, config.mac_weights, s_mac, config.q, 0.0, config.level), gate, rep.tail))
    for p in config.clustering_powers:
        spec = DependenceSpec("abs_power_autocorr", p, config.h_clustering)
        gate = tail.moment_gate(p, "abs_power")
        rep.tests.append(_record(spec.label, method_hac, None, hac.hac_test(x, spec, 0.0, kernel, config.level),
                                 gate, rep.tail))
        rep.tests.append(_record(spec.label, method_grp, config.q,
                                 groups.run_group_test(x, spec, config.q, 0.0, config.level), gate, rep.tail))
    return rep


def run_empirical(returns: Mapping[str, Any], config: EmpiricalConfig = EmpiricalConfig()) -> EmpiricalReport:
    """Analyse every instrument; a failing instrument records its error and the rest proceed."""
    report = EmpiricalReport(config=config)
    for name, x in returns.items():
        try:
            report.instruments.append(analyze_instrument(name, x, config))
        except RobustDepError as err:
            n = int(np.size(x))
            report.instruments.append(InstrumentReport(name=name, n_obs=n, error=f"{type(err).__name__}: {err}"))
    return report
