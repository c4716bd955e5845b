"""
Euclidean projections onto the supported constraint sets.

The l1 ball and simplex use the sort-based simplex projection; the box is
coordinatewise clipping; the nuclear-norm ball projects the singular values of
a full SVD onto the l1 ball of the same radius.
"""

import numpy as np
from scipy import linalg

from core import ConstraintKind, ConstraintSet, Point, UsageError, ensure_finite


def simplex_projection(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """
    Project a vector onto {w >= 0, sum(w) = radius}.

    Args:
        v (np.ndarray): 1-d input
        radius (float): Total mass of the simplex

    Returns:
        np.ndarray: The projection
    """
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - radius
    index = np.arange(1, v.size + 1)
    rho = np.nonzero(u - cumulative / index > 0)[0][-1]
    threshold = cumulative[rho] / (rho + 1.0)
    return np.maximum(v - threshold, 0.0)


def l1_ball_projection(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Project a vector onto {||w||_1 <= radius}; feasible inputs are returned unchanged."""
    magnitude = np.abs(v)
    if magnitude.sum() <= radius:
        return v.copy()
    return np.sign(v) * simplex_projection(magnitude, radius)


def nuclear_ball_projection(x: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Project a matrix onto {||X||_* <= radius} through a full SVD."""
    u, s, vt = linalg.svd(x, full_matrices=False)
    if s.sum() <= radius:
        return x.copy()
    s = simplex_projection(s, radius)
    return (u * s) @ vt


@ensure_finite("project")
def project(constraint: ConstraintSet, x: Point) -> Point:
    """
    Euclidean projection of x onto the constraint set.

    Raises:
        UsageError: On shape mismatch
    """
    if x.shape != tuple(constraint.shape):
        raise UsageError(f"point shape {x.shape} does not match set shape {tuple(constraint.shape)}")
    if constraint.kind is ConstraintKind.L1_BALL:
        return l1_ball_projection(x.ravel(), constraint.radius).reshape(x.shape)
    if constraint.kind is ConstraintKind.SIMPLEX:
        return simplex_projection(x.ravel(), constraint.radius).reshape(x.shape)
    if constraint.kind is ConstraintKind.BOX:
        return np.clip(x, constraint.lo, constraint.hi)
    return nuclear_ball_projection(x, constraint.radius)
