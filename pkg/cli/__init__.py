"""
Command-line layer: experiment configs, run orchestration, record sinks,
the LMO microbenchmark and the noise sweep.
"""

from .bench import BenchRow, bench_lmo, bench_matrix, cmd_bench_lmo, write_bench_csv
from .config import SCHEMA, ExperimentConfig, ProblemKind, load_config
from .runner import (
    EXIT_CONFIG,
    EXIT_INGEST,
    EXIT_NUMERIC,
    EXIT_OK,
    ProblemSetup,
    build_problem,
    cmd_run,
    run_experiment,
    solve,
    thread_budget,
)
from .sinks import (
    METRICS_HEADER,
    BaseRecordSink,
    ConsoleRecordSink,
    CsvRecordSink,
    RecordSinkChain,
)
from .sweep import DEFAULT_GRID, SweepRow, cmd_sweep_noise, sweep_noise, write_sweep_csv

__all__ = [
    'BenchRow', 'bench_lmo', 'bench_matrix', 'cmd_bench_lmo', 'write_bench_csv',
    'SCHEMA', 'ExperimentConfig', 'ProblemKind', 'load_config',
    'EXIT_CONFIG', 'EXIT_INGEST', 'EXIT_NUMERIC', 'EXIT_OK',
    'ProblemSetup', 'build_problem', 'cmd_run', 'run_experiment', 'solve', 'thread_budget',
    'METRICS_HEADER', 'BaseRecordSink', 'ConsoleRecordSink', 'CsvRecordSink', 'RecordSinkChain',
    'DEFAULT_GRID', 'SweepRow', 'cmd_sweep_noise', 'sweep_noise', 'write_sweep_csv',
]
