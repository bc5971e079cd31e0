"""Named study presets and the YAML configuration schema.

A config file is a mapping; only ``preset`` is required::

    preset: table1          # table1 | fig1 | fig2 | fig3 | empirical
    scale: desk             # desk (2000 replications) | full (10000)
    replications: 2000      # overrides scale
    seed: 20240101
    T: 5000
    workers: 1
    chunk_size: 250
    methods: [hac_qs, "group_t(q=4)", "group_t(q=8)"]
    phi_grid: [0, 0.1, 0.2, 0.3, 0.4, 0.5]      # fig1, fig2
    alpha_grid: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]   # fig3
    powers: [1, 0.5, 0.25, 0.1]                 # s (table1, fig1, fig2) or p (fig3)
    cases: [a, b, c]

``empirical`` takes the keys of :class:`robustdep.empirical.EmpiricalConfig`
instead.  Unknown keys and ill-typed values are rejected with the key path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

import yaml

from . import experiments as ex
from .dgp import DgpSpec, InnovationDist
from .errors import ConfigError
from .series import DependenceSpec

KESTEN3_ALPHA = math.pi ** (1.0 / 3.0) / 2.0
CASES = {
    "a": InnovationDist.normal(),
    "b": InnovationDist.skewed_t(50.0, 0.5),
    "c": InnovationDist.skewed_t(3.0, 0.5),
}
DEFAULT_SEED = 20240101
SIGNED_POWERS = (1.0, 0.5, 0.25, 0.1)
ABS_POWERS = (0.1, 0.25, 1.0, 2.0)
PHI_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
ALPHA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
PRESETS = ("table1", "fig1", "fig2", "fig3", "empirical")

_COMMON_KEYS = {
    "preset": str, "scale": str, "replications": int, "seed": int, "T": int, "workers": int,
    "chunk_size": int, "methods": list, "phi_grid": list, "alpha_grid": list, "powers": list,
    "cases": list, "nominal_level": float, "truth_obs": int,
}


@dataclass(frozen=True)
class StudyPlan:
    preset: str
    settings: dict

    @property
    def replications(self) -> int:
        return self.settings["replications"]


def _check_type(key: str, value: Any, typ: type) -> Any:
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, bool):
        raise ConfigError(f"config key '{key}': expected int, got bool")
    if not isinstance(value, typ):
        raise ConfigError(f"config key '{key}': expected {typ.__name__}, got {type(value).__name__}")
    return value


def _number_list(key: str, values: list) -> tuple[float, ...]:
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"config key '{key}[{i}]': expected a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


def study_plan(raw: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> StudyPlan:
    """Validate a config mapping (plus CLI overrides) into a :class:`StudyPlan`."""
    data = dict(raw or {})
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "preset" not in data:
        raise ConfigError("config key 'preset' is required; choose from " + ", ".join(PRESETS))
    preset = data["preset"]
    if preset not in PRESETS:
        raise ConfigError(f"config key 'preset': unknown preset {preset!r}; available: {', '.join(PRESETS)}")
    if preset == "empirical":
        return StudyPlan(preset, data)
    for key in data:
        if key not in _COMMON_KEYS:
            raise ConfigError(f"config key '{key}': unknown key for preset {preset!r}")
    s = {k: _check_type(k, v, _COMMON_KEYS[k]) for k, v in data.items()}
    scale = s.get("scale", "desk")
    if scale not in ("desk", "full"):
        raise ConfigError(f"config key 'scale': expected 'desk' or 'full', got {scale!r}")
    s.setdefault("replications", ex.FULL_REPLICATIONS if scale == "full" else ex.DESK_REPLICATIONS)
    s.setdefault("seed", DEFAULT_SEED)
    s.setdefault("T", 5000)
    s.setdefault("workers", 1)
    s.setdefault("chunk_size", 250)
    s.setdefault("nominal_level", 0.05)
    s.setdefault("truth_obs", 10**7)
    for key in ("phi_grid", "alpha_grid", "powers"):
        if key in s:
            s[key] = _number_list(key, s[key])
    if "cases" in s:
        for i, c in enumerate(s["cases"]):
            if c not in CASES:
                raise ConfigError(f"config key 'cases[{i}]': unknown case {c!r}; choose from a, b, c")
        s["cases"] = tuple(s["cases"])
    if "methods" in s:
        for i, m in enumerate(s["methods"]):
            try:
                ex.parse_method(str(m))
            except ConfigError as err:
                raise ConfigError(f"config key 'methods[{i}]': {err}") from None
        s["methods"] = tuple(s["methods"])
    defaults = _PRESET_DEFAULTS[preset]
    for key, value in defaults.items():
        s.setdefault(key, value)
    return StudyPlan(preset, s)


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"config {path} is not valid YAML: {err}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: top level must be a mapping")
    return data


_PRESET_DEFAULTS: dict[str, dict] = {
    "table1": {"cases": ("a", "b", "c"), "powers": SIGNED_POWERS, "methods": ex.DEFAULT_METHODS},
    "fig1": {"cases": ("a", "c"), "powers": SIGNED_POWERS, "phi_grid": PHI_GRID,
             "methods": (ex.HAC_METHOD, ex.group_method(8))},
    "fig2": {"cases": ("a",), "powers": (1.0,), "phi_grid": PHI_GRID, "methods": ex.DEFAULT_METHODS},
    "fig3": {"cases": ("a",), "powers": ABS_POWERS, "alpha_grid": ALPHA_GRID, "methods": ex.DEFAULT_METHODS},
}


def _config_for(s: dict, case: str, specs) -> ex.McConfig:
    dgp = DgpSpec(alpha=KESTEN3_ALPHA, innovation=CASES[case], T=s["T"], seed=s["seed"])
    return ex.McConfig(dgp=dgp, specs=tuple(specs), methods=s["methods"], replications=s["replications"],
                       nominal_level=s["nominal_level"], chunk_size=s["chunk_size"], workers=s["workers"])


def _signed_specs(s: dict):
    return [DependenceSpec("signed_power_crosscorr", p, 1) for p in s["powers"]]


def run_table1(s: dict) -> ex.McSummary:
    parts = [ex.mc_size(_config_for(s, c, _signed_specs(s)), "case", float("abc".index(c)))
             for c in s["cases"]]
    return ex.concat(parts, "size")


def _run_power(s: dict) -> ex.McSummary:
    parts = [ex.mc_power_curve(_config_for(s, c, _signed_specs(s)), s["phi_grid"]) for c in s["cases"]]
    return ex.concat(parts, "power")


def run_fig3(s: dict) -> ex.McSummary:
    specs = [DependenceSpec("abs_power_autocorr", p, 1) for p in s["powers"]]
    parts = [ex.mc_coverage(_config_for(s, c, specs), s["alpha_grid"], s["truth_obs"]) for c in s["cases"]]
    return ex.concat(parts, "coverage")


RUNNERS: dict[str, Callable[[dict], ex.McSummary]] = {
    "table1": run_table1,
    "fig1": _run_power,
    "fig2": _run_power,
    "fig3": run_fig3,
}


def run_plan(plan: StudyPlan) -> ex.McSummary:
    if plan.preset not in RUNNERS:
        raise ConfigError(f"preset {plan.preset!r} is not a Monte Carlo study")
    summary = RUNNERS[plan.preset](plan.settings)
    summary.extra["preset"] = plan.preset
    summary.extra["settings"] = {k: list(v) if isinstance(v, tuple) else v
                                 for k, v in sorted(plan.settings.items()) if k != "workers"}
    return summary


def wide_table(summary: ex.McSummary) -> str:
    """Table-1 layout: one row per DGP, one column per (measure, method)."""
    dgps: list[str] = []
    cols: list[tuple[str, str]] = []
    cells: dict = {}
    for r in summary.rows:
        if r.dgp not in dgps:
            dgps.append(r.dgp)
        key = (r.measure, r.method)
        if key not in cols:
            cols.append(key)
        cells[(r.dgp, key)] = r.frequency
    lines = ["dgp," + ",".join(f'"{m} {meth}"' for m, meth in cols)]
    for d in dgps:
        vals = [ex.format_float(cells.get((d, c), math.nan)) for c in cols]
        lines.append(f'"{d}",' + ",".join(vals))
    return "\n".join(lines) + "\n"
