"""Command-line interface: ``fastmi <command> [options]``.

Exit codes: 0 success, 2 usage, 3 input or parse error, 4 configuration
or domain error, 5 numerical failure.
"""

import argparse
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from . import __version__, io, studies
from .errors import (ConfigError, DomainError, FastMIError, GridOverflow, InvalidInput,
                     NumericalError)
from .estimator import EstimatorConfig, estimate_mi
from .independence import MIN_PERMUTATIONS, permutation_test

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CONFIG = 4
EXIT_NUMERICAL = 5

COMMANDS = ("estimate", "test", "simulate-mse", "simulate-power", "bench-time", "real-data")
SEED_ENV = "FASTMI_SEED"
DEFAULT_CLI_PERMS = 999


@dataclass
class RunConfig:
    """Validated options for one CLI invocation."""

    command: str
    estimator: EstimatorConfig
    input_path: Optional[Path] = None
    columns: tuple = ("0", "1")
    group: Optional[str] = None
    perms: int = DEFAULT_CLI_PERMS
    alpha: float = 0.05
    seed: Optional[int] = None
    families: tuple = studies.STUDY_FAMILIES
    taus: Optional[tuple] = None
    ns: Optional[tuple] = None
    reps: Optional[int] = None
    threads: int = 1
    fmt: str = "json"
    output_path: Optional[Path] = None


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fastmi", description="Tuning-free copula mutual information and independence tests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("estimator")
    g.add_argument("--grid-size", type=int, default=EstimatorConfig.m, metavar="M",
                   help="grid points per axis, a power of two (default: %(default)s)")
    g.add_argument("--pad", type=float, default=EstimatorConfig.pad,
                   help="grid margin in probit units (default: %(default)s)")
    g.add_argument("--ecf", choices=("direct", "binned"), default=EstimatorConfig.ecf_mode,
                   help="empirical characteristic function evaluator (default: %(default)s)")
    g.add_argument("--floor", type=float, default=EstimatorConfig.floor,
                   help="lower clamp for the copula density (default: %(default)s)")
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=("json", "csv"), default="json")
    o.add_argument("--output", type=Path, help="write here instead of stdout")
    o.add_argument("--seed", type=int, help=f"root seed (fallback: ${SEED_ENV})")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", type=Path, required=True, help="CSV file, header optional")
    data.add_argument("--cols", type=_name_list, default=("0", "1"),
                      help="two column names or 0-based indices, comma separated (default: 0,1)")

    test_opts = argparse.ArgumentParser(add_help=False)
    test_opts.add_argument("--perms", type=int, help="number of permutations")
    test_opts.add_argument("--alpha", type=float, default=0.05)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--family", type=_name_list,
                      help="comma-separated copula families (default: all; gaussian for bench-time)")
    grid.add_argument("--tau-grid", type=_float_list, help="comma-separated Kendall tau values")
    grid.add_argument("--n-grid", type=_int_list, help="comma-separated sample sizes")
    grid.add_argument("--reps", type=int, help="replications per cell")
    grid.add_argument("--full-scale", action="store_true",
                      help=f"use {studies.FULL_SCALE_REPS} replications per cell")

    threads = argparse.ArgumentParser(add_help=False)
    threads.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")

    sub.add_parser("estimate", parents=[common, data], help="estimate MI from a CSV file")
    sub.add_parser("test", parents=[common, data, test_opts], help="permutation independence test")
    sub.add_parser("simulate-mse", parents=[common, grid, threads], help="MSE simulation study")
    sub.add_parser("simulate-power", parents=[common, grid, test_opts, threads],
                   help="power simulation study")
    sub.add_parser("bench-time", parents=[common, grid], help="run-time scaling benchmark")
    rd = sub.add_parser("real-data", parents=[common, data, test_opts],
                        help="correlation, MI and test for a user-supplied dataset")
    rd.add_argument("--group", help="optional grouping column for the scatter data")
    return parser


def resolve_seed(seed):
    """CLI seed, else ``$FASTMI_SEED``, else fresh entropy."""
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV, "").strip()
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return int(np.random.SeedSequence().entropy % (2 ** 63))


def make_config(args):
    """Turn parsed arguments into a validated :class:`RunConfig`."""
    estimator = EstimatorConfig(m=args.grid_size, pad=args.pad, ecf_mode=args.ecf,
                                floor=args.floor)
    cfg = RunConfig(command=args.command, estimator=estimator, fmt=args.format,
                    output_path=args.output, seed=resolve_seed(args.seed))
    if hasattr(args, "input"):
        if len(args.cols) != 2:
            raise ConfigError(f"--cols needs exactly two columns, got {len(args.cols)}")
        cfg.input_path, cfg.columns = args.input, tuple(args.cols)
        cfg.group = getattr(args, "group", None)
    if hasattr(args, "alpha"):
        if not 0.0 < args.alpha < 1.0:
            raise ConfigError(f"--alpha must lie in (0, 1), got {args.alpha}")
        cfg.alpha = args.alpha
        default = studies.DEFAULT_HARNESS_PERMS if args.command == "simulate-power" \
            else DEFAULT_CLI_PERMS
        cfg.perms = default if args.perms is None else args.perms
        if cfg.perms < MIN_PERMUTATIONS:
            raise ConfigError(f"--perms must be >= {MIN_PERMUTATIONS}, got {cfg.perms}")
    if hasattr(args, "threads"):
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        cfg.threads = args.threads
    if hasattr(args, "tau_grid"):
        _configure_grid(cfg, args)
    return cfg


def _configure_grid(cfg, args):
    cmd = args.command
    if cmd == "simulate-mse":
        taus, ns = studies.DEFAULT_MSE_TAUS, studies.DEFAULT_MSE_NS
    elif cmd == "simulate-power":
        taus, ns = studies.DEFAULT_POWER_TAUS, studies.DEFAULT_POWER_NS
    else:
        taus, ns = (0.5,), studies.DEFAULT_BENCH_NS
    if args.family is not None:
        cfg.families = tuple(args.family)
    elif cmd == "bench-time":
        cfg.families = ("gaussian",)
    cfg.taus = args.tau_grid or taus
    cfg.ns = args.n_grid or ns
    if args.reps is not None:
        cfg.reps = args.reps
    elif args.full_scale:
        cfg.reps = studies.FULL_SCALE_REPS
    else:
        cfg.reps = 10 if cmd == "bench-time" else studies.DEFAULT_REPS
    if cmd == "bench-time":
        if len(cfg.families) != 1 or len(cfg.taus) != 1:
            raise ConfigError("bench-time takes a single --family and a single --tau-grid value")
        studies._validate_cells(cfg.families, cfg.taus, cfg.ns, cfg.reps)
        if cfg.reps < studies.MIN_BENCH_REPS:
            raise ConfigError(f"--reps must be >= {studies.MIN_BENCH_REPS} for timing")
    else:
        studies._validate_cells(cfg.families, cfg.taus, cfg.ns, cfg.reps)


def _config_echo(cfg):
    echo = {k: v for k, v in asdict(cfg).items() if v is not None}
    if cfg.taus is None:
        for key in ("families", "threads"):
            echo.pop(key, None)
    if cfg.command in ("estimate", "bench-time", "simulate-mse"):
        for key in ("perms", "alpha"):
            echo.pop(key, None)
    for key in ("input_path", "output_path"):
        if key in echo:
            echo[key] = str(echo[key])
    return echo


def cmd_estimate(cfg):
    data, _, _ = io.read_columns(cfg.input_path, cfg.columns)
    est = estimate_mi(data, config=cfg.estimator)
    return {"command": "estimate", "estimator": studies.ESTIMATOR_NAME, "mi_nats": est.value,
            "mi_bits": est.bits, "n": est.n, "floor_hits": est.floor_hits,
            "config": _config_echo(cfg)}


def cmd_test(cfg):
    data, _, _ = io.read_columns(cfg.input_path, cfg.columns)
    res = permutation_test(data, r=cfg.perms, alpha=cfg.alpha, seed=cfg.seed,
                           config=cfg.estimator, keep_null=False)
    return {"command": "test", "estimator": studies.ESTIMATOR_NAME, "statistic": res.statistic,
            "p_value": res.p_value, "reject": res.reject, "r": res.r, "alpha": res.alpha,
            "seed": res.seed, "n": len(data), "config": _config_echo(cfg)}


def cmd_real_data(cfg):
    extra = (cfg.group,) if cfg.group else ()
    data, extras, _ = io.read_columns(cfg.input_path, cfg.columns, extra=extra)
    pearson = stats.pearsonr(data[:, 0], data[:, 1])
    est = estimate_mi(data, config=cfg.estimator)
    res = permutation_test(data, r=cfg.perms, alpha=cfg.alpha, seed=cfg.seed,
                           config=cfg.estimator, keep_null=False)
    groups = extras[cfg.group] if cfg.group else ["all"] * len(data)
    scatter = [{"group": g, "x": float(x), "y": float(y)} for g, (x, y) in zip(groups, data)]
    return {"command": "real-data", "estimator": studies.ESTIMATOR_NAME, "n": len(data),
            "columns": list(cfg.columns), "pearson_r": float(pearson.statistic),
            "pearson_p_value": float(pearson.pvalue), "mi_nats": est.value,
            "mi_bits": est.bits, "floor_hits": est.floor_hits,
            "perm_statistic": res.statistic, "p_value": res.p_value, "reject": res.reject,
            "r": res.r, "alpha": res.alpha, "seed": res.seed, "scatter": scatter,
            "config": _config_echo(cfg)}


def run_study(cfg):
    if cfg.command == "simulate-mse":
        report = studies.simulate_mse(cfg.families, cfg.taus, cfg.ns, cfg.reps, seed=cfg.seed,
                                      config=cfg.estimator, threads=cfg.threads)
    elif cfg.command == "simulate-power":
        report = studies.simulate_power(cfg.families, cfg.taus, cfg.ns, cfg.reps,
                                        perms=cfg.perms, alpha=cfg.alpha, seed=cfg.seed,
                                        config=cfg.estimator, threads=cfg.threads)
    else:
        report = studies.bench_time(cfg.ns, cfg.reps, family=cfg.families[0], tau=cfg.taus[0],
                                    seed=cfg.seed, config=cfg.estimator)
    report.metadata["config"] = _config_echo(cfg)
    return report


def _emit(text, path, stdout):
    if path is None:
        stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def render(result, cfg, stdout):
    """Write a command result in the requested format."""
    if isinstance(result, studies.StudyReport):
        if cfg.fmt == "json":
            _emit(io.dumps_json(result.to_dict()), cfg.output_path, stdout)
            return
        _emit(io.dumps_csv(result.aggregates), cfg.output_path, stdout)
        if cfg.output_path is not None:
            path = Path(cfg.output_path)
            records = path.with_name(f"{path.stem}_records{path.suffix or '.csv'}")
            records.write_text(io.dumps_csv(result.records), encoding="utf-8")
        return
    if cfg.fmt == "json":
        _emit(io.dumps_json(result), cfg.output_path, stdout)
        return
    if result["command"] == "real-data":
        # Scatter data is the plot-ready table; the summary goes in a comment line.
        summary = {k: v for k, v in result.items() if k not in ("scatter", "config")}
        head = "# " + " ".join(f"{k}={v}" for k, v in summary.items()) + "\n"
        _emit(head + io.dumps_csv(result["scatter"]), cfg.output_path, stdout)
        return
    flat = {k: v for k, v in result.items() if k != "config"}
    _emit(io.dumps_csv([flat]), cfg.output_path, stdout)


HANDLERS = {"estimate": cmd_estimate, "test": cmd_test, "real-data": cmd_real_data,
            "simulate-mse": run_study, "simulate-power": run_study, "bench-time": run_study}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = make_config(args)
        result = HANDLERS[cfg.command](cfg)
        render(result, cfg, stdout)
    except (ConfigError, DomainError, GridOverflow) as exc:
        stderr.write(f"fastmi: configuration error: {exc}\n")
        return EXIT_CONFIG
    except (InvalidInput, OSError, UnicodeDecodeError) as exc:
        stderr.write(f"fastmi: input error: {exc}\n")
        return EXIT_INPUT
    except (NumericalError, FastMIError, ArithmeticError) as exc:
        stderr.write(f"fastmi: numerical error: {exc}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
