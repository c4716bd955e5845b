"""
Nuclear-ball LMO versus nuclear-ball projection, per call.
"""

import logging
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from core import RngStream, StreamId, UsageError, nuclear_norm_ball
from lmo import lmo
from solvers import nuclear_ball_projection

logger = logging.getLogger(__name__)

MIN_SIZE = 16
BENCH_HEADER = ["n", "lmo_us", "proj_us", "ratio"]
TARGET_RATIO = 5.0


@dataclass(frozen=True)
class BenchRow:
    n: int
    lmo_us: float
    proj_us: float

    @property
    def ratio(self) -> float:
        return self.proj_us / self.lmo_us if self.lmo_us > 0 else float("inf")

    def as_row(self) -> List[str]:
        return [str(self.n), f"{self.lmo_us:.3f}", f"{self.proj_us:.3f}", f"{self.ratio:.3f}"]


def bench_matrix(n: int, rng: RngStream) -> np.ndarray:
    """Standard-normal n x n matrix."""
    return rng.standard_normal((n, n))


def _median_us(func, trials: int) -> float:
    timings = []
    for _ in range(trials):
        start = time.perf_counter()
        func()
        timings.append(time.perf_counter() - start)
    return 1e6 * statistics.median(timings)


def bench_lmo(sizes: Iterable[int], trials: int = 5, seed: int = 0,
              radius: float = 1.0) -> List[BenchRow]:
    """
    Median microseconds per call of the nuclear LMO and the nuclear projection.

    Both operate on the same matrix for each size; the projection radius is
    small enough that the projection is never the identity.

    Raises:
        UsageError: For sizes below 16 or fewer than one trial
    """
    sizes = list(sizes)
    if trials < 1:
        raise UsageError("trials must be at least 1")
    if any(n < MIN_SIZE for n in sizes):
        raise UsageError(f"benchmark sizes must be at least {MIN_SIZE}")
    rows = []
    for n in sizes:
        rng = RngStream(seed, "bench")
        d = bench_matrix(n, rng)
        constraint = nuclear_norm_ball((n, n), radius)
        lmo_stream = RngStream(seed, StreamId.LMO)
        lmo_us = _median_us(lambda: lmo(constraint, d, lmo_stream), trials)
        proj_us = _median_us(lambda: nuclear_ball_projection(d, radius), trials)
        row = BenchRow(n=n, lmo_us=lmo_us, proj_us=proj_us)
        logger.info("n=%d lmo %.1f us, projection %.1f us, ratio %.2f", n, lmo_us, proj_us, row.ratio)
        if row.ratio < TARGET_RATIO:
            logger.warning("n=%d: projection is only %.2fx slower than the LMO (target %.0fx)",
                           n, row.ratio, TARGET_RATIO)
        rows.append(row)
    return rows


def write_bench_csv(rows: List[BenchRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([row.as_row() for row in rows], columns=BENCH_HEADER).to_csv(path, index=False)
    return path


def cmd_bench_lmo(sizes: Iterable[int], trials: int = 5, output: Optional[Union[str, Path]] = None,
                  seed: int = 0) -> int:
    """The `bench-lmo` subcommand; writes bench.csv. Returns an exit code."""
    try:
        rows = bench_lmo(sizes, trials, seed)
    except UsageError as exc:
        logger.error("%s", exc)
        return 2
    path = write_bench_csv(rows, output if output is not None else Path("runs") / "bench.csv")
    logger.info("wrote %s", path)
    return 0
