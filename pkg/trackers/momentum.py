"""
Momentum-based recursive estimators.

Every tracker update evaluates a stochastic quantity twice, once at the
previous point and once at the current point, under the same sample. Sharing
is done by stream replay: mark the run's SampleStreams, evaluate at the
previous point, rewind, evaluate at the current point. When the two points
coincide the second call is skipped and the single sample is reused, so call
counters always reflect real oracle calls.
"""

import logging
from typing import Optional

import numpy as np

from core import NumericError, Point, SampleStreams, UsageError
from oracles import BilevelOracle, CompositionalOracle, hypergradient_sample

from .state import TrackerState

logger = logging.getLogger(__name__)


def _check_weight(name: str, value: float) -> None:
    if not 0.0 < value <= 1.0:
        raise UsageError(f"{name} must lie in (0, 1], got {value}")


def _same(a: Point, b: Point) -> bool:
    return a.shape == b.shape and np.array_equal(a, b)


def _require_finite(value: Point, what: str, iteration: Optional[int]) -> Point:
    if not np.all(np.isfinite(value)):
        raise NumericError(f"{what} is not finite", iteration)
    return value


def inner_sgd_step(oracle: BilevelOracle, state: TrackerState, x_prev: Point, delta_t: float,
                   rng: SampleStreams, iteration: Optional[int] = None) -> Point:
    """
    One stochastic gradient step on the inner problem:
        y_t = y_{t-1} - delta_t * grad_y g(x_{t-1}, y_{t-1}; xi_t)

    Args:
        oracle (BilevelOracle): Problem oracle
        state (TrackerState): state.y holds y_{t-1}; replaced by y_t
        x_prev (Point): Outer iterate x_{t-1}
        delta_t (float): Step in (0, 1]
        rng (SampleStreams): Run streams
        iteration (Optional[int]): Reported in errors

    Returns:
        Point: The new inner iterate

    Raises:
        UsageError: If delta_t is outside (0, 1]
        NumericError: If the sampled gradient is not finite
    """
    _check_weight("delta_t", delta_t)
    grad = _require_finite(oracle.grad_y_g(x_prev, state.y, rng), "inner gradient", iteration)
    state.prev_y = state.y
    state.y = state.y - delta_t * grad
    return state.y


def bilevel_track(oracle: BilevelOracle, state: TrackerState, x_t: Point, x_prev: Point,
                  y_t: Point, y_prev: Point, rho_t: float, k_t: int,
                  rng: SampleStreams, iteration: Optional[int] = None) -> Point:
    """
    Hypergradient tracking:
        d_t = (1 - rho_t)(d_{t-1} - h(x_{t-1}, y_{t-1})) + h(x_t, y_t)
    with both h evaluated on the same (theta_t, xi_t) draws.

    Returns:
        Point: The new tracked estimate, also stored in state.d
    """
    _check_weight("rho_t", rho_t)
    if _same(x_t, x_prev) and _same(y_t, y_prev):
        current = hypergradient_sample(oracle, x_t, y_t, k_t, rng)
        previous = current
    else:
        mark = rng.mark()
        previous = hypergradient_sample(oracle, x_prev, y_prev, k_t, rng)
        rng.rewind(mark)
        current = hypergradient_sample(oracle, x_t, y_t, k_t, rng)
    d = (1.0 - rho_t) * (state.d - previous) + current
    state.d = _require_finite(d, "tracked hypergradient", iteration)
    return state.d


def compositional_track_y(oracle: CompositionalOracle, state: TrackerState, x_t: Point,
                          x_prev: Point, delta_t: float, rng: SampleStreams,
                          iteration: Optional[int] = None) -> Point:
    """
    Inner-map tracking:
        y_t = (1 - delta_t)(y_{t-1} - h(x_{t-1}, xi_t)) + h(x_t, xi_t)

    Returns:
        Point: The new inner-map estimate, also stored in state.y
    """
    _check_weight("delta_t", delta_t)
    if _same(x_t, x_prev):
        current = oracle.sample_h(x_t, rng)
        previous = current
    else:
        mark = rng.mark()
        previous = oracle.sample_h(x_prev, rng)
        rng.rewind(mark)
        current = oracle.sample_h(x_t, rng)
    y = (1.0 - delta_t) * (state.y - previous) + current
    state.prev_y = state.y
    state.y = _require_finite(y, "tracked inner map", iteration)
    return state.y


def compositional_gradient_sample(oracle: CompositionalOracle, x: Point, y: Point,
                                  rng: SampleStreams) -> Point:
    """grad h(x, xi)^T grad f(y, theta) from one theta and one xi draw."""
    return oracle.vjp_h(x, oracle.grad_f(y, rng), rng)


def compositional_track_d(oracle: CompositionalOracle, state: TrackerState, x_t: Point,
                          x_prev: Point, y_t: Point, y_prev: Point, rho_t: float,
                          rng: SampleStreams, iteration: Optional[int] = None) -> Point:
    """
    Compositional gradient tracking:
        d_t = (1 - rho_t)(d_{t-1} - gC(x_{t-1}, y_{t-1})) + gC(x_t, y_t)
    where gC(x, y) = grad h(x, xi_t)^T grad f(y, theta_t).

    Returns:
        Point: The new tracked estimate, also stored in state.d
    """
    _check_weight("rho_t", rho_t)
    if _same(x_t, x_prev) and _same(y_t, y_prev):
        current = compositional_gradient_sample(oracle, x_t, y_t, rng)
        previous = current
    else:
        mark = rng.mark()
        previous = compositional_gradient_sample(oracle, x_prev, y_prev, rng)
        rng.rewind(mark)
        current = compositional_gradient_sample(oracle, x_t, y_t, rng)
    d = (1.0 - rho_t) * (state.d - previous) + current
    state.d = _require_finite(d, "tracked compositional gradient", iteration)
    return state.d
