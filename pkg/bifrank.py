"""
bifrank command-line entry point.

    python bifrank.py run --config files/configs/matcomp_synth.cfg --set solver.seed=7
    python bifrank.py bench-lmo --sizes 16 100 500
    python bifrank.py sweep-noise --config files/configs/matcomp_synth.cfg

Environment (read from .env when present):
    BIFRANK_THREADS     worker cap for --parallel-seeds and BLAS threads
    BIFRANK_LOG_LEVEL   logging level, INFO by default
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

BLAS_THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def get_resource_path(relative_path: str) -> str:
    """Absolute path of a file shipped next to this script."""
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), relative_path)


def bootstrap_environment() -> None:
    """
    Load .env and pin BLAS thread counts.

    Must run before numpy is imported; thread variables already set in the
    environment are left alone.
    """
    load_dotenv(os.path.join(os.getcwd(), ".env"))
    load_dotenv(get_resource_path(".env"))
    threads = os.getenv("BIFRANK_THREADS", "").strip()
    if threads:
        for name in BLAS_THREAD_VARIABLES:
            os.environ.setdefault(name, threads)


def configure_logging() -> None:
    level_name = os.getenv("BIFRANK_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(level=level, format="[%(asctime)s] %(message)s", datefmt="%H:%M:%S")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bifrank",
                                     description="Projection-free stochastic bilevel and compositional optimization")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one configured experiment")
    run.add_argument("--config", help="experiment config file (INI)")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                     help="override a config value; may be repeated")
    run.add_argument("--parallel-seeds", type=int, default=1, metavar="N",
                     help="run N consecutive seeds concurrently")
    run.add_argument("--output", help="output directory, replaces output.directory")

    bench = commands.add_parser("bench-lmo", help="time the nuclear LMO against the nuclear projection")
    bench.add_argument("--sizes", type=int, nargs="+", default=[16, 100, 250, 500])
    bench.add_argument("--trials", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--output", default=os.path.join("runs", "bench.csv"))

    sweep = commands.add_parser("sweep-noise", help="final errors of SBFW and SFW over a noise grid")
    sweep.add_argument("--config", help="synthetic matrix completion config")
    sweep.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    sweep.add_argument("--grid", type=float, nargs="+", default=None)
    sweep.add_argument("--output", help="CSV path, defaults to <output.directory>/sweep.csv")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    bootstrap_environment()
    configure_logging()
    args = build_parser().parse_args(argv)

    # numpy is imported from here on
    from cli import DEFAULT_GRID, cmd_bench_lmo, cmd_run, cmd_sweep_noise

    if args.command == "run":
        return cmd_run(args.config, args.overrides, args.parallel_seeds, args.output)
    if args.command == "bench-lmo":
        return cmd_bench_lmo(args.sizes, args.trials, args.output, args.seed)
    return cmd_sweep_noise(args.config, args.grid if args.grid else DEFAULT_GRID,
                           args.overrides, args.output)


if __name__ == "__main__":
    sys.exit(main())
