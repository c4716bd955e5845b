"""
Hypergradient estimators for bilevel oracles.

hypergradient_sample returns the biased stochastic estimate
    grad_x f - grad^2_xy g . M . grad_y f
where M is the randomized truncated Neumann approximation of the inverse inner
Hessian. surrogate_gradient_exact evaluates the same expression with exact
population derivatives and a dense linear solve; tests use it as the reference
for the estimator's bias.
"""

import logging

import numpy as np
from scipy import linalg

from core import NumericError, Point, SampleStreams, UsageError

from .base_oracle import BilevelOracle

logger = logging.getLogger(__name__)


def neumann_product(oracle: BilevelOracle, x: Point, y: Point, v: Point,
                    depth: int, rng: SampleStreams) -> Point:
    """
    Apply `depth` sampled factors (I - hvp_yy_g / L_g) to v.

    Factor i = depth touches v first, then depth - 1, down to 1. Each factor
    consumes one Hessian sample.
    """
    w = np.array(v, dtype=np.float64, copy=True)
    for _ in range(depth):
        w = w - oracle.hvp_yy_g(x, y, w, rng) / oracle.L_g
    return w


def neumann_inverse_apply(oracle: BilevelOracle, x: Point, y: Point, v: Point,
                          k: int, rng: SampleStreams) -> Point:
    """
    Randomized Neumann estimate of (grad^2_yy G)^{-1} v.

    Draws l uniformly from {0, ..., k-1} on the Hessian stream and returns
    (k / L_g) times the product of l sampled factors applied to v.

    Args:
        oracle (BilevelOracle): Problem oracle
        x (Point): Outer point
        y (Point): Inner point
        v (Point): Vector in inner space
        k (int): Truncation level, >= 1
        rng (SampleStreams): Run streams

    Returns:
        Point: Estimate with the shape of v

    Raises:
        UsageError: If k < 1
        NumericError: If v is not finite
    """
    if k < 1:
        raise UsageError(f"Neumann truncation k must be >= 1, got {k}")
    if not np.all(np.isfinite(v)):
        raise NumericError("neumann_inverse_apply received a non-finite vector")
    depth = int(rng.hessian.integers(0, k))
    return (k / oracle.L_g) * neumann_product(oracle, x, y, v, depth, rng)


def hypergradient_sample(oracle: BilevelOracle, x: Point, y: Point, k: int,
                         rng: SampleStreams) -> Point:
    """
    One draw of the biased hypergradient estimate at (x, y).

    grad_x f and grad_y f share one theta draw. The Neumann chain consumes
    l Hessian samples, then the cross Hessian takes a separate draw, so one
    call costs two outer samples and l + 1 Hessian samples.

    Args:
        oracle (BilevelOracle): Problem oracle
        x (Point): Outer point
        y (Point): Inner point
        k (int): Neumann truncation level, >= 1
        rng (SampleStreams): Run streams

    Returns:
        Point: Estimate with the shape of x
    """
    if k < 1:
        raise UsageError(f"Neumann truncation k must be >= 1, got {k}")
    theta_mark = rng.theta.mark()
    gx = oracle.grad_x_f(x, y, rng)
    rng.theta.rewind(theta_mark)
    gy = oracle.grad_y_f(x, y, rng)
    w = neumann_inverse_apply(oracle, x, y, gy, k, rng)
    return gx - oracle.cross_hvp_xy_g(x, y, w, rng)


def surrogate_gradient_exact(oracle: BilevelOracle, x: Point, y: Point) -> Point:
    """
    Surrogate gradient with an exact inverse:
        grad_x F - grad^2_xy G (grad^2_yy G)^{-1} grad_y F

    At y = y*(x) this is the true gradient of x -> F(x, y*(x)).

    Raises:
        CapabilityError: If the oracle exposes no exact derivatives
    """
    pieces = oracle.exact_pieces(x, y)
    z = linalg.solve(pieces.hess_yy_G, np.ravel(pieces.grad_y_F), assume_a='sym')
    correction = pieces.hess_xy_G @ z
    return np.asarray(pieces.grad_x_F, dtype=np.float64) - correction.reshape(np.shape(x))
