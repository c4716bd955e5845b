"""
Projection-based bilevel baseline.

Same inner step and hypergradient tracker as SBFW, but the outer update is a
projected gradient step x_{t+1} = Proj(x_t - alpha_t d_t), alpha_t = alpha0/sqrt(t).
It exists to compare per-iteration cost against the LMO-based drivers.
"""

import logging
import math
from typing import Optional

import numpy as np

from core import ConstraintSet, NumericError, Point, SampleStreams, SolverAborted
from oracles import BilevelOracle, hypergradient_sample
from trackers import TrackerState, bilevel_track, inner_sgd_step

from .projections import project
from .records import (
    RecordCallback,
    RunRecorder,
    RunResult,
    SelectedIterate,
    SolverConfig,
    check_shapes,
    draw_output_index,
    finish_run,
    initial_point,
)

logger = logging.getLogger(__name__)


def run_projected_baseline(oracle: BilevelOracle, constraint: ConstraintSet, config: SolverConfig,
                           x_init: Optional[Point] = None,
                           on_record: Optional[RecordCallback] = None) -> RunResult:
    """
    Projected stochastic bilevel gradient descent.

    Args:
        oracle (BilevelOracle): Problem oracle
        constraint (ConstraintSet): Feasible region of x
        config (SolverConfig): Uses alpha0 and the SBFW schedules for delta, rho, k
        x_init (Optional[Point]): Feasible start; the canonical vertex when None
        on_record (Optional[RecordCallback]): Called with each RunRecord

    Returns:
        RunResult: Returned iterate and the recorded metrics
    """
    check_shapes(oracle, constraint)
    T = config.horizon_T
    rng = SampleStreams(config.seed)
    spec = config.schedule_spec(True, oracle.mu_g, oracle.L_g, oracle.sigma_g_sq)
    x = initial_point(constraint, x_init)
    recorder = RunRecorder(oracle, constraint, config, on_record)
    selected = SelectedIterate(draw_output_index(config, rng))
    logger.info("projected baseline start: T=%d alpha0=%g seed=%d", T, config.alpha0, config.seed)

    t = 0
    try:
        y = np.asarray(oracle.initial_inner(x), dtype=np.float64)
        first = config.resolve(spec, 1)
        state = TrackerState.initial(hypergradient_sample(oracle, x, y, first.k, rng), y, x)
        for t in range(1, T + 1):
            step = config.resolve(spec, t)
            if t >= 2:
                x_prev, y_prev = state.prev_x, state.y
                inner_sgd_step(oracle, state, x_prev, step.delta, rng, iteration=t)
                bilevel_track(oracle, state, x, x_prev, state.y, y_prev,
                              step.rho, step.k, rng, iteration=t)
            recorder.maybe_record(t, x, state.y)
            selected.offer(t, x, state.y)
            state.prev_x = x
            x = project(constraint, x - (config.alpha0 / math.sqrt(t)) * state.d)
    except NumericError as exc:
        logger.error("projected baseline aborted at iteration %d: %s", t, exc)
        raise SolverAborted(str(exc), t, x, recorder.records) from exc

    result = finish_run(recorder, selected, T, x, state.y)
    logger.info("projected baseline done: %d iterations, %.1f ms", T, recorder.elapsed_ms())
    return result
