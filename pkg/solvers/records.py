"""
Solver configuration, run records and the per-run recorder.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional

import numpy as np

from core import (
    ConfigurationError,
    ConstraintSet,
    Point,
    Regime,
    SampleStreams,
    Schedule,
    ScheduleSpec,
    UsageError,
    schedule,
)
from lmo import fw_gap
from oracles import OracleCallCounter

logger = logging.getLogger(__name__)


class Algorithm(Enum):
    SBFW = "sbfw"
    SCFW = "scfw"
    SFW = "sfw"
    PROJECTED = "projected"


class OutputRule(Enum):
    """Which iterate a run returns."""
    LAST = "last"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class SolverConfig:
    """
    Description of one solver run.

    Attributes:
        algorithm (Algorithm): Driver to use
        regime (str): "convex" or "nonconvex"
        horizon_T (int): Number of iterations
        seed (int): Seed of the run's SampleStreams
        record_every (int): Record cadence; the first and last iterate are always recorded
        output_rule (Optional[OutputRule]): Defaults to LAST (convex) or UNIFORM (nonconvex)
        delta, rho, eta (Optional[float]): Fixed step overrides in (0, 1]
        k (Optional[int]): Fixed Neumann truncation override
        k_max (Optional[int]): Cap on the scheduled Neumann truncation
        alpha0 (float): Base step of the projected baseline
    """
    algorithm: Algorithm = Algorithm.SBFW
    regime: str = "convex"
    horizon_T: int = 1000
    seed: int = 0
    record_every: int = 1
    output_rule: Optional[OutputRule] = None
    delta: Optional[float] = None
    rho: Optional[float] = None
    eta: Optional[float] = None
    k: Optional[int] = None
    k_max: Optional[int] = None
    alpha0: float = 0.1

    def __post_init__(self):
        if self.regime not in ("convex", "nonconvex"):
            raise ConfigurationError(f"regime must be 'convex' or 'nonconvex', got {self.regime!r}")
        if int(self.horizon_T) < 1:
            raise ConfigurationError("horizon_T must be at least 1")
        if int(self.record_every) < 1:
            raise ConfigurationError("record_every must be at least 1")
        for name in ("delta", "rho", "eta"):
            value = getattr(self, name)
            if value is not None and not 0.0 < value <= 1.0:
                raise ConfigurationError(f"{name} override must lie in (0, 1], got {value}")
        for name in ("k", "k_max"):
            value = getattr(self, name)
            if value is not None and int(value) < 1:
                raise ConfigurationError(f"{name} must be at least 1, got {value}")
        if not self.alpha0 > 0:
            raise ConfigurationError("alpha0 must be positive")

    @property
    def convex(self) -> bool:
        return self.regime == "convex"

    @property
    def effective_output_rule(self) -> OutputRule:
        if self.output_rule is not None:
            return self.output_rule
        return OutputRule.LAST if self.convex else OutputRule.UNIFORM

    def schedule_spec(self, bilevel: bool, mu_g: float = 1.0, L_g: float = 1.0,
                      sigma_g_sq: float = 0.0) -> ScheduleSpec:
        if bilevel:
            regime = Regime.SBFW_CONVEX if self.convex else Regime.SBFW_NONCONVEX
        else:
            regime = Regime.SCFW_CONVEX if self.convex else Regime.SCFW_NONCONVEX
        return ScheduleSpec(regime=regime, mu_g=mu_g, L_g=L_g, sigma_g_sq=sigma_g_sq,
                            horizon_T=self.horizon_T)

    def resolve(self, spec: ScheduleSpec, t: int) -> Schedule:
        """Theory schedule at t with the configured overrides applied."""
        base = schedule(spec, t)
        k = base.k
        if self.k is not None:
            k = int(self.k)
        elif self.k_max is not None:
            k = min(k, int(self.k_max))
        return Schedule(delta=self.delta if self.delta is not None else base.delta,
                        rho=self.rho if self.rho is not None else base.rho,
                        eta=self.eta if self.eta is not None else base.eta,
                        k=k)


@dataclass(frozen=True)
class RunRecord:
    """
    Metrics of the iterate (x_t, y_t) at one recorded iteration.

    Optional metrics are None when the problem cannot provide them.
    """
    iteration: int
    wall_clock_ms: float
    objective: Optional[float]
    normalized_error: Optional[float]
    fw_gap: Optional[float]
    inner_gap: Optional[float]
    counters: OracleCallCounter = field(default_factory=OracleCallCounter)

    def as_row(self) -> dict:
        return {
            "iter": self.iteration,
            "wall_clock_ms": self.wall_clock_ms,
            "objective": self.objective,
            "normalized_error": self.normalized_error,
            "fw_gap": self.fw_gap,
            "inner_gap": self.inner_gap,
            "sfo_outer": self.counters.outer,
            "sfo_inner": self.counters.inner,
            "sfo_hessian": self.counters.hessian,
            "sfo_map": self.counters.map,
        }


@dataclass
class RunResult:
    """
    Outcome of a solver run.

    Attributes:
        point (Point): Returned iterate (last or uniformly selected)
        records (List[RunRecord]): Recorded metrics in iteration order
        output_index (int): Iteration index of the returned iterate
        final (RunRecord): Metrics of the returned iterate
    """
    point: Point
    records: List[RunRecord]
    output_index: int
    final: RunRecord


RecordCallback = Callable[[RunRecord], None]


def _as_float(value) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class RunRecorder:
    """
    Measures solver time and turns iterates into RunRecords.

    The clock only runs while the solver works; metric evaluation is excluded
    from wall_clock_ms.
    """

    def __init__(self, oracle, constraint: ConstraintSet, config: SolverConfig,
                 on_record: Optional[RecordCallback] = None):
        self.oracle = oracle
        self.constraint = constraint
        self.config = config
        self.on_record = on_record
        self.records: List[RunRecord] = []
        self._elapsed = 0.0
        self._started = time.perf_counter()

    def _pause(self) -> None:
        self._elapsed += time.perf_counter() - self._started

    def _resume(self) -> None:
        self._started = time.perf_counter()

    def elapsed_ms(self) -> float:
        return 1000.0 * (self._elapsed + time.perf_counter() - self._started)

    def due(self, t: int) -> bool:
        return t == 1 or t % self.config.record_every == 0

    def evaluate(self, t: int, x: Point, y: Optional[Point]) -> RunRecord:
        """Compute the record of (x, y) without emitting it."""
        self._pause()
        try:
            gap = None
            grad = self.oracle.exact_gradient(x)
            if grad is not None:
                gap = fw_gap(self.constraint, x, np.asarray(grad, dtype=np.float64))
            inner_gap = None
            if y is not None:
                y_star = _inner_reference(self.oracle, x)
                if y_star is not None:
                    inner_gap = float(np.linalg.norm(np.ravel(y) - np.ravel(y_star)))
            return RunRecord(
                iteration=t,
                wall_clock_ms=1000.0 * self._elapsed,
                objective=_as_float(self.oracle.objective(x, y)),
                normalized_error=_as_float(self.oracle.error_metric(x)),
                fw_gap=_as_float(gap),
                inner_gap=inner_gap,
                counters=self.oracle.counter.snapshot(),
            )
        finally:
            self._resume()

    def record(self, t: int, x: Point, y: Optional[Point]) -> RunRecord:
        record = self.evaluate(t, x, y)
        self.records.append(record)
        logger.debug("iter %d objective=%s fw_gap=%s", t, record.objective, record.fw_gap)
        if self.on_record is not None:
            self.on_record(record)
        return record

    def maybe_record(self, t: int, x: Point, y: Optional[Point]) -> None:
        if self.due(t):
            self.record(t, x, y)


def _inner_reference(oracle, x: Point) -> Optional[Point]:
    if hasattr(oracle, "inner_optimum"):
        return oracle.inner_optimum(x)
    if hasattr(oracle, "exact_h"):
        return oracle.exact_h(x)
    return None


def initial_point(constraint: ConstraintSet, x_init: Optional[Point]) -> Point:
    """Validated starting iterate; the canonical vertex when none is given."""
    if x_init is None:
        return constraint.canonical_vertex()
    x = np.array(x_init, dtype=np.float64)
    if x.shape != tuple(constraint.shape):
        raise UsageError(f"initial point shape {x.shape} does not match set shape {tuple(constraint.shape)}")
    if not constraint.contains(x):
        raise UsageError("initial point is not feasible")
    return x


def draw_output_index(config: SolverConfig, rng: SampleStreams) -> int:
    """
    Iteration whose iterate the run returns.

    The uniform index is drawn from the data stream before the loop starts;
    solvers never read that stream, so the value equals a draw at run end and
    only the selected iterate needs to be kept.
    """
    if config.effective_output_rule is OutputRule.LAST:
        return config.horizon_T + 1
    return int(rng.data.integers(1, config.horizon_T + 1))


def check_shapes(oracle, constraint: ConstraintSet) -> None:
    if tuple(oracle.outer_shape) != tuple(constraint.shape):
        raise UsageError(f"constraint shape {tuple(constraint.shape)} does not match "
                         f"problem shape {tuple(oracle.outer_shape)}")


class SelectedIterate:
    """Copy of the iterate the run will return under the uniform output rule."""

    def __init__(self, index: int):
        self.index = index
        self.x: Optional[Point] = None
        self.y: Optional[Point] = None

    def offer(self, t: int, x: Point, y: Optional[Point]) -> None:
        if t == self.index:
            self.x = x.copy()
            self.y = None if y is None else y.copy()


def finish_run(recorder: RunRecorder, selected: SelectedIterate, T: int, x: Point,
               y: Optional[Point]) -> RunResult:
    """Record the last iterate and assemble the result for the selected one."""
    last = recorder.record(T + 1, x, y)
    if selected.index == T + 1:
        return RunResult(point=x, records=recorder.records, output_index=T + 1, final=last)
    final = recorder.evaluate(selected.index, selected.x, selected.y)
    return RunResult(point=selected.x, records=recorder.records,
                     output_index=selected.index, final=final)
