"""Axisymmetric Hall-MHD lab - command-line entry point.

Subcommands:
- run: one simulation, writing config.txt, diagnostics.csv and summary.txt
- sweep: breakdown-time sweep over eps or nu, one directory per row
- bench: the functional-inequality bench with the [bench] settings
- mms: manufactured-solution convergence study

Exit codes: 0 on success, 1 on configuration errors, 2 on I/O errors.
Logging is configured from the environment (optionally a .env file).
"""

import argparse
import os
import sys
from typing import List, Optional, Sequence

from dotenv import load_dotenv

from experiments import (
    CONFIG_FILE,
    SUMMARY_FILE,
    RunConfig,
    convergence_study,
    fit_trend,
    format_config,
    load_config,
    run_bench,
    run_experiment,
    sweep,
    write_convergence_csv,
    write_sweep_csv,
)
from manufactured import MANUFACTURED_CASES
from src.core import (
    BenchError,
    CheckpointError,
    ConfigurationError,
    GridError,
    SimulationError,
    configure_logging,
    get_logger,
)
from version import get_version

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2

DEFAULT_SWEEP_VALUES = {"eps": "1e-1,1e-2,1e-3,1e-4", "nu": "1,0.3,0.1,0.03"}

logger = get_logger(__name__, "app")


def setup_logging() -> None:
    """Configure logging from LOG_* environment variables after loading .env."""
    load_dotenv()
    configure_logging(
        log_level=os.environ.get("LOG_LEVEL", "INFO"),
        enable_console=os.environ.get("LOG_ENABLE_CONSOLE", "true").lower() == "true",
        enable_file=os.environ.get("LOG_ENABLE_FILE", "false").lower() == "true",
        enable_structured=os.environ.get("LOG_ENABLE_STRUCTURED", "true").lower() == "true",
        log_dir=os.environ.get("LOG_DIR", "logs"),
        log_file=os.environ.get("LOG_FILE", "axisym-hall-lab.log"),
    )


def parse_float_list(text: str) -> List[float]:
    """Parse a comma list of floats, for example "1e-1,1e-2"."""
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"invalid value list {text!r}: {e}") from e
    if not values:
        raise ConfigurationError("value list must not be empty")
    return values


def parse_int_list(text: str) -> List[int]:
    """Parse a comma list of integers, for example "32,64,128"."""
    try:
        values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"invalid resolution list {text!r}: {e}") from e
    if not values:
        raise ConfigurationError("resolution list must not be empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="axisym-hall-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_version()}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (defaults apply when omitted)")
    common.add_argument("--out", help="output directory (defaults to control.output_dir)")

    run_parser = subparsers.add_parser("run", parents=[common], help="run one simulation")
    run_parser.add_argument("--resume", help="checkpoint to resume from")

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="sweep eps or nu")
    sweep_parser.add_argument("--param", choices=sorted(DEFAULT_SWEEP_VALUES), default="eps")
    sweep_parser.add_argument("--values", help="comma list of parameter values")
    sweep_parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    subparsers.add_parser("bench", parents=[common], help="run the inequality bench")

    mms_parser = subparsers.add_parser("mms", parents=[common], help="manufactured-solution convergence study")
    mms_parser.add_argument("--case", choices=MANUFACTURED_CASES, default="coupled")
    mms_parser.add_argument("--resolutions", default="32,64,128", help="comma list, each double the last")
    mms_parser.add_argument("--t-final", type=float, default=0.01, dest="t_final")
    return parser


def _output_dir(args: argparse.Namespace, config: RunConfig) -> str:
    return args.out or config.control.output_dir


def command_run(args: argparse.Namespace, config: RunConfig) -> int:
    result = run_experiment(config, _output_dir(args, config), resume_from=args.resume)
    print(f"{result.outcome.reason.value} t_proxy={result.outcome.verdict.t_proxy!r} -> {result.csv_path}")
    return EXIT_OK


def command_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    out_dir = _output_dir(args, config)
    values = parse_float_list(args.values or DEFAULT_SWEEP_VALUES[args.param])
    result = sweep(config, args.param, values, out_dir, workers=args.workers)

    write_sweep_csv(result, os.path.join(out_dir, "sweep.csv"))
    with open(os.path.join(out_dir, CONFIG_FILE), "w", encoding="utf-8") as handle:
        handle.write(format_config(config))

    usable = [row for row in result.rows if row.error is None]
    if len(usable) >= 2:
        summary = fit_trend(result).text
    else:
        summary = f"parameter: {result.param}\nverdict: {result.verdict}\nrows: {len(result.rows)}\n"
    with open(os.path.join(out_dir, SUMMARY_FILE), "w", encoding="utf-8") as handle:
        handle.write(summary)
    print(f"sweep over {args.param}: {len(result.rows)} rows, verdict {result.verdict}")
    return EXIT_OK


def command_bench(args: argparse.Namespace, config: RunConfig) -> int:
    reports = run_bench(config, _output_dir(args, config))
    print(f"bench: {len(reports)} checks")
    return EXIT_OK


def command_mms(args: argparse.Namespace, config: RunConfig) -> int:
    out_dir = _output_dir(args, config)
    os.makedirs(out_dir, exist_ok=True)
    table = convergence_study(
        args.case,
        parse_int_list(args.resolutions),
        params=config.physics,
        t_final=args.t_final,
        cfl_safety=config.control.cfl_safety,
    )
    write_convergence_csv(table, os.path.join(out_dir, "convergence.csv"))
    lines = [f"case: {table.case}"] + [
        f"n={row.n} h={row.h!r} error={row.error!r} order={row.order!r}" for row in table.rows
    ]
    with open(os.path.join(out_dir, SUMMARY_FILE), "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


COMMANDS = {"run": command_run, "sweep": command_sweep, "bench": command_bench, "mms": command_mms}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except (ConfigurationError, GridError, BenchError) as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, CheckpointError) as e:
        logger.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as e:
        logger.error(f"Simulation error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    setup_logging()
    sys.exit(main())
