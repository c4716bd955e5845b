"""
Linear minimization oracles.

lmo(set, d) returns argmin_{s in X} <s, d> for the four supported sets. The
l1, simplex and box oracles are closed form. The nuclear-norm oracle needs only
the top singular pair of d, found by power iteration with alternating
matrix-vector products so d^T d is never formed.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core import ConstraintKind, ConstraintSet, NumericError, Point, RngStream, UsageError

logger = logging.getLogger(__name__)

POWER_TOL = 1e-8
POWER_MAX_ITER = 500


@dataclass(frozen=True)
class LmoResult:
    """
    Output of a linear minimization oracle call.

    Attributes:
        vertex (Point): The minimizer s
        inner_product (float): <s, d>
        iterations_used (int): Power iterations spent (nuclear ball only)
    """
    vertex: Point
    inner_product: float
    iterations_used: int = 0


def top_singular_pair(d: np.ndarray, rng: Optional[RngStream] = None,
                      tol: float = POWER_TOL,
                      max_iter: int = POWER_MAX_ITER) -> Optional[Tuple[np.ndarray, float, np.ndarray, int]]:
    """
    Leading singular triple of d by power iteration on d^T d.

    Each sweep applies d then d^T. Iteration stops when the singular value
    estimate changes by at most tol relative, or after max_iter sweeps. A start
    vector that collapses to zero triggers one restart from a fresh draw.

    Args:
        d (np.ndarray): Matrix of shape (n, m)
        rng (Optional[RngStream]): Source of start vectors; a fixed generator when None
        tol (float): Relative tolerance on the singular value
        max_iter (int): Sweep budget per attempt

    Returns:
        Optional[Tuple]: (u, sigma, v, sweeps) or None if d is numerically zero
    """
    generator = rng.generator if rng is not None else np.random.default_rng(0)
    total = 0
    for _attempt in range(2):
        v = generator.standard_normal(d.shape[1])
        v /= np.linalg.norm(v)
        u = np.zeros(d.shape[0])
        sigma = 0.0
        sigma_prev = 0.0
        stagnated = False
        for _ in range(max_iter):
            u = d @ v
            u_norm = np.linalg.norm(u)
            if u_norm == 0.0:
                stagnated = True
                break
            u /= u_norm
            v = d.T @ u
            sigma = np.linalg.norm(v)
            total += 1
            if sigma == 0.0:
                stagnated = True
                break
            v /= sigma
            if abs(sigma - sigma_prev) <= tol * sigma:
                return u, float(sigma), v, total
            sigma_prev = sigma
        if not stagnated:
            logger.debug("power iteration hit the %d sweep budget", max_iter)
            return u, float(sigma), v, total
        logger.debug("power iteration start vector collapsed, restarting")
    return None


def lmo(constraint: ConstraintSet, d: Point, rng: Optional[RngStream] = None) -> LmoResult:
    """
    Solve min_{s in X} <s, d>.

    Ties in argmax / argmin go to the lowest flat index. A zero direction
    returns constraint.canonical_vertex().

    Args:
        constraint (ConstraintSet): Feasible region
        d (Point): Direction, same shape as the set
        rng (Optional[RngStream]): Start-vector stream for the nuclear oracle

    Returns:
        LmoResult: Vertex, its inner product with d, and power sweeps used

    Raises:
        UsageError: On shape mismatch
        NumericError: If d is not finite
    """
    if d.shape != tuple(constraint.shape):
        raise UsageError(f"direction shape {d.shape} does not match set shape {tuple(constraint.shape)}")
    if not np.all(np.isfinite(d)):
        raise NumericError("lmo received a non-finite direction")

    sweeps = 0
    if not np.any(d):
        vertex = constraint.canonical_vertex()
    elif constraint.kind is ConstraintKind.L1_BALL:
        flat = d.ravel()
        i = int(np.argmax(np.abs(flat)))
        vertex = np.zeros(constraint.size)
        vertex[i] = -constraint.radius * np.sign(flat[i])
        vertex = vertex.reshape(constraint.shape)
    elif constraint.kind is ConstraintKind.SIMPLEX:
        i = int(np.argmin(d.ravel()))
        vertex = np.zeros(constraint.size)
        vertex[i] = constraint.radius
        vertex = vertex.reshape(constraint.shape)
    elif constraint.kind is ConstraintKind.BOX:
        vertex = np.where(d < 0, constraint.hi, constraint.lo).astype(np.float64)
    else:
        pair = top_singular_pair(d, rng)
        if pair is None:
            vertex = constraint.canonical_vertex()
        else:
            u, _sigma, v, sweeps = pair
            vertex = -constraint.radius * np.outer(u, v)
    return LmoResult(vertex=vertex, inner_product=float(np.vdot(vertex, d)), iterations_used=sweeps)


def fw_gap(constraint: ConstraintSet, x: Point, grad: Point, rng: Optional[RngStream] = None) -> float:
    """
    Frank-Wolfe gap max_{v in X} <v - x, -grad>.

    Args:
        constraint (ConstraintSet): Feasible region
        x (Point): Feasible point
        grad (Point): Gradient at x
        rng (Optional[RngStream]): Start-vector stream passed to the nuclear oracle

    Returns:
        float: The gap; nonnegative up to rounding for feasible x

    Raises:
        UsageError: If x is not in the set or shapes differ
    """
    if grad.shape != x.shape:
        raise UsageError(f"gradient shape {grad.shape} does not match point shape {x.shape}")
    if not constraint.contains(x):
        raise UsageError("fw_gap needs a feasible point")
    vertex = lmo(constraint, grad, rng).vertex
    return float(np.vdot(x - vertex, grad))
