"""Command-line interface.

Subcommands: ``simulate``, ``test``, ``mc`` and ``empirical``.  Exit codes:
0 success, 1 usage or configuration error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, empirical, groups, hac, presets
from . import experiments as ex
from . import io as rio
from .dgp import DgpSpec, InnovationDist, simulate_ar_arch
from .errors import ConfigError, DataError, NumericalError, RobustDepError
from .series import MEASURES, DependenceSpec

log = logging.getLogger("robustdep")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise _UsageError(f"{self.prog}: error: {message}")


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="write a simulated AR-ARCH/GARCH series as a returns CSV")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--omega", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=presets.KESTEN3_ALPHA)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--innovation", choices=("normal", "skewed_t"), default="normal")
    p.add_argument("--eta", type=float, default=3.0, help="skewed-t degrees of freedom")
    p.add_argument("--lam", type=float, default=0.5, help="skewed-t skewness")
    p.add_argument("--T", type=int, default=5000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, default=presets.DEFAULT_SEED)
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--name", default="R", help="column name")
    p.add_argument("--out", required=True, type=Path)


def _add_test(sub):
    p = sub.add_parser("test", help="HAC and group t-tests for one series and one measure")
    p.add_argument("input", type=Path)
    p.add_argument("--column", help="instrument column (default: the first)")
    p.add_argument("--mode", choices=("returns", "prices"), default="returns")
    p.add_argument("--measure", choices=MEASURES, default="signed_power_crosscorr")
    p.add_argument("--exponent", type=float, default=1.0)
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--beta0", type=float, default=0.0)
    p.add_argument("--level", type=float, default=0.95, help="confidence level")
    p.add_argument("--kernel", choices=("quadratic_spectral", "bartlett"), default="quadratic_spectral")


def _add_mc(sub):
    p = sub.add_parser("mc", help="run a Monte Carlo preset")
    p.add_argument("--config", type=Path, help="YAML config file")
    p.add_argument("--preset", help=f"one of {', '.join(presets.PRESETS[:-1])}")
    p.add_argument("--scale", choices=("desk", "full"))
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--chunk-size", type=int, dest="chunk_size")
    p.add_argument("--out-dir", type=Path, default=Path("."))


def _add_empirical(sub):
    p = sub.add_parser("empirical", help="full per-instrument report for a returns/prices file")
    p.add_argument("input", type=Path)
    p.add_argument("--mode", choices=("returns", "prices"), default="returns")
    p.add_argument("--config", type=Path, help="YAML file with empirical settings")
    p.add_argument("--q", type=int)
    p.add_argument("--tail-fraction", type=float, dest="tail_fraction")
    p.add_argument("--out-dir", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robustdep", description="Robust inference on dependence in heavy-tailed series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_simulate(sub)
    _add_test(sub)
    _add_mc(sub)
    _add_empirical(sub)
    return parser


def cmd_simulate(args) -> int:
    dist = InnovationDist.normal() if args.innovation == "normal" else InnovationDist.skewed_t(args.eta, args.lam)
    spec = DgpSpec(phi=args.phi, omega=args.omega, alpha=args.alpha, beta=args.beta, innovation=dist,
                   T=args.T, burn_in=args.burn_in, seed=args.seed)
    x = simulate_ar_arch(spec, args.replication)
    rio.write_returns_csv(args.out, rio.synthetic_dates(x.size), {args.name: x})
    log.info("wrote %d observations to %s", x.size, args.out)
    return EXIT_OK


def _pick_column(data: rio.ReturnsData, column: Optional[str]):
    if not data.series:
        raise DataError("input has no instrument columns")
    if column is None:
        column = data.instruments[0]
    if column not in data.series:
        raise DataError(f"column {column!r} not found; available: {', '.join(data.instruments)}")
    return column, data.series[column]


def cmd_test(args) -> int:
    data = rio.read_returns_csv(args.input, args.mode)
    name, x = _pick_column(data, args.column)
    spec = DependenceSpec(args.measure, args.exponent, args.lag)
    h = hac.hac_test(x, spec, args.beta0, hac.KernelSpec(args.kernel), args.level)
    g = groups.run_group_test(x, spec, args.q, args.beta0, args.level)
    out = {
        "instrument": name,
        "n_obs": int(x.size),
        "measure": spec.label,
        "beta0": args.beta0,
        "level": args.level,
        "hac": {"method": h.method, "estimate": h.estimate, "std_err": h.std_err, "t_stat": h.t_stat,
                "p_value": h.p_value, "ci": list(h.ci), "bandwidth": h.bandwidth_used},
        "group": {"method": g.method, "q": g.q, "estimate": g.pooled, "s_beta": g.s_beta, "t_stat": g.t_stat,
                  "p_value_bound": g.p_value, "ci": list(g.ci), "critical_value": g.critical_value,
                  "reject": g.reject, "discarded": g.discarded, "group_estimates": g.estimates.tolist()},
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_mc(args) -> int:
    raw = presets.load_config(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in ("preset", "scale", "replications", "seed", "T", "workers",
                                               "chunk_size")}
    plan = presets.study_plan(raw, overrides)
    if plan.preset == "empirical":
        raise ConfigError("the empirical preset runs through the 'empirical' subcommand")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    summary = presets.run_plan(plan)
    csv_path = args.out_dir / f"{plan.preset}.csv"
    ex.write_outputs(summary, csv_path, args.out_dir / f"{plan.preset}_manifest.json")
    if plan.preset == "table1":
        (args.out_dir / "table1_wide.csv").write_text(presets.wide_table(summary))
    print(f"wrote {csv_path} ({len(summary.rows)} rows)")
    return EXIT_OK


def cmd_empirical(args) -> int:
    raw = presets.load_config(args.config) if args.config else {}
    if raw.get("preset", "empirical") != "empirical":
        raise ConfigError("config key 'preset': the empirical subcommand needs preset 'empirical'")
    raw.update({k: v for k, v in (("q", args.q), ("tail_fraction", args.tail_fraction)) if v is not None})
    config = empirical.EmpiricalConfig.from_mapping(raw)
    data = rio.read_returns_csv(args.input, args.mode)
    report = empirical.run_empirical(data.series, config)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "empirical_report.csv").write_text(report.to_csv())
    (args.out_dir / "empirical_report.json").write_text(report.to_json())
    for inst in report.instruments:
        if inst.error:
            print(f"{inst.name}: {inst.error}", file=sys.stderr)
        else:
            lo, hi = inst.tail.ci
            print(f"{inst.name}: n={inst.n_obs} zeta={inst.tail.zeta_hat:.3f} [{lo:.2f},{hi:.2f}] "
                  f"{inst.power_rule}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "test": cmd_test, "mc": cmd_mc, "empirical": cmd_empirical}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RobustDepError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
