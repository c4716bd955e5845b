"""
Stochastic Frank-Wolfe drivers.

run_sbfw    bilevel problems: inner SGD step, hypergradient tracking, LMO, convex step
run_scfw    compositional problems: inner-map tracking, gradient tracking, LMO, convex step
run_sfw_baseline    single-level momentum stochastic Frank-Wolfe

Each driver owns a SampleStreams bundle seeded from the config, emits
RunRecords through an optional callback and returns a RunResult. A NaN or Inf
anywhere in the loop stops the run with SolverAborted, which carries the last
finite iterate and the records emitted so far.
"""

import logging
from typing import Optional

import numpy as np

from core import ConstraintSet, NumericError, Point, SampleStreams, SolverAborted, convex_step, sfw_schedule
from lmo import lmo
from oracles import BilevelOracle, CompositionalOracle, SingleLevelOracle, hypergradient_sample
from trackers import (
    TrackerState,
    bilevel_track,
    compositional_gradient_sample,
    compositional_track_d,
    compositional_track_y,
    inner_sgd_step,
)

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


def run_sbfw(oracle: BilevelOracle, constraint: ConstraintSet, config: SolverConfig,
             x_init: Optional[Point] = None,
             on_record: Optional[RecordCallback] = None) -> RunResult:
    """
    Stochastic bilevel Frank-Wolfe.

    Iteration 1 uses d_1 = h(x_1, y_1). Each later iteration t updates y by one
    inner SGD step from (x_{t-1}, y_{t-1}), tracks the hypergradient at
    (x_t, y_t), calls the LMO on d_t and takes the convex step with eta_t.

    Args:
        oracle (BilevelOracle): Problem oracle
        constraint (ConstraintSet): Feasible region of x
        config (SolverConfig): Horizon, regime, seed, cadence and overrides
        x_init (Optional[Point]): Feasible start; the canonical vertex when None
        on_record (Optional[RecordCallback]): Called with each RunRecord

    Returns:
        RunResult: Returned iterate and the recorded metrics

    Raises:
        UsageError: On shape mismatch or an infeasible start
        SolverAborted: When an iterate or estimate stops being finite
    """
    check_shapes(oracle, constraint)
    T = config.horizon_T
    rng = SampleStreams(config.seed)
    spec = config.schedule_spec(True, oracle.mu_g, oracle.L_g, oracle.sigma_g_sq)
    x = initial_point(constraint, x_init)
    recorder = RunRecorder(oracle, constraint, config, on_record)
    selected = SelectedIterate(draw_output_index(config, rng))
    logger.info("SBFW start: T=%d regime=%s seed=%d L_g/mu_g=%.3g",
                T, config.regime, config.seed, oracle.L_g / oracle.mu_g)

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
            vertex = lmo(constraint, state.d, rng.lmo).vertex
            state.prev_x = x
            x = convex_step(x, vertex, step.eta)
    except NumericError as exc:
        logger.error("SBFW aborted at iteration %d: %s", t, exc)
        raise SolverAborted(str(exc), t, x, recorder.records) from exc

    result = finish_run(recorder, selected, T, x, state.y)
    logger.info("SBFW done: %d iterations, %.1f ms, returning iterate %d",
                T, recorder.elapsed_ms(), result.output_index)
    return result


def run_scfw(oracle: CompositionalOracle, constraint: ConstraintSet, config: SolverConfig,
             x_init: Optional[Point] = None,
             on_record: Optional[RecordCallback] = None) -> RunResult:
    """
    Stochastic compositional Frank-Wolfe.

    Starts from y_0 = h(x_0, xi_0), d_0 = grad C(x_0, y_0) and x_1 = x_0. Each
    iteration tracks the inner map, then the compositional gradient under the
    same xi_t, then calls the LMO and takes the convex step.

    Args:
        oracle (CompositionalOracle): Problem oracle
        constraint (ConstraintSet): Feasible region of x
        config (SolverConfig): Horizon, regime, seed, cadence and overrides
        x_init (Optional[Point]): Feasible start; the canonical vertex when None
        on_record (Optional[RecordCallback]): Called with each RunRecord

    Returns:
        RunResult: Returned iterate and the recorded metrics

    Raises:
        UsageError: On shape mismatch or an infeasible start
        SolverAborted: When an iterate or estimate stops being finite
    """
    check_shapes(oracle, constraint)
    T = config.horizon_T
    rng = SampleStreams(config.seed)
    spec = config.schedule_spec(False)
    x = initial_point(constraint, x_init)
    recorder = RunRecorder(oracle, constraint, config, on_record)
    selected = SelectedIterate(draw_output_index(config, rng))
    logger.info("SCFW start: T=%d regime=%s seed=%d", T, config.regime, config.seed)

    t = 0
    try:
        y = np.asarray(oracle.sample_h(x, rng), dtype=np.float64)
        state = TrackerState.initial(compositional_gradient_sample(oracle, x, y, rng), y, x)
        for t in range(1, T + 1):
            step = config.resolve(spec, t)
            y_prev = state.y
            with rng.replay():
                compositional_track_y(oracle, state, x, state.prev_x, step.delta, rng, iteration=t)
            compositional_track_d(oracle, state, x, state.prev_x, state.y, y_prev,
                                  step.rho, rng, iteration=t)
            recorder.maybe_record(t, x, state.y)
            selected.offer(t, x, state.y)
            vertex = lmo(constraint, state.d, rng.lmo).vertex
            state.prev_x = x
            x = convex_step(x, vertex, step.eta)
    except NumericError as exc:
        logger.error("SCFW aborted at iteration %d: %s", t, exc)
        raise SolverAborted(str(exc), t, x, recorder.records) from exc

    result = finish_run(recorder, selected, T, x, state.y)
    logger.info("SCFW done: %d iterations, %.1f ms, returning iterate %d",
                T, recorder.elapsed_ms(), result.output_index)
    return result


def run_sfw_baseline(oracle: SingleLevelOracle, constraint: ConstraintSet, config: SolverConfig,
                     x_init: Optional[Point] = None,
                     on_record: Optional[RecordCallback] = None) -> RunResult:
    """
    Momentum stochastic Frank-Wolfe on a single-level objective:
        d_t = (1 - rho_t) d_{t-1} + rho_t grad f(x_t; theta_t),  d_0 = 0
    with rho_t = 4/(t+8)^(2/3) and eta_t = 2/(t+8); config overrides apply.
    """
    check_shapes(oracle, constraint)
    T = config.horizon_T
    rng = SampleStreams(config.seed)
    x = initial_point(constraint, x_init)
    recorder = RunRecorder(oracle, constraint, config, on_record)
    selected = SelectedIterate(draw_output_index(config, rng))
    logger.info("SFW start: T=%d seed=%d", T, config.seed)

    t = 0
    d = np.zeros_like(x)
    try:
        for t in range(1, T + 1):
            step = sfw_schedule(t)
            rho = config.rho if config.rho is not None else step.rho
            eta = config.eta if config.eta is not None else step.eta
            grad = oracle.grad(x, rng)
            d = (1.0 - rho) * d + rho * grad
            if not np.all(np.isfinite(d)):
                raise NumericError("tracked gradient is not finite", t)
            recorder.maybe_record(t, x, None)
            selected.offer(t, x, None)
            vertex = lmo(constraint, d, rng.lmo).vertex
            x = convex_step(x, vertex, eta)
    except NumericError as exc:
        logger.error("SFW aborted at iteration %d: %s", t, exc)
        raise SolverAborted(str(exc), t, x, recorder.records) from exc

    result = finish_run(recorder, selected, T, x, None)
    logger.info("SFW done: %d iterations, %.1f ms", T, recorder.elapsed_ms())
    return result
