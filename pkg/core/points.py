"""
Decision variables.

A point is a float64 numpy array. Vectors have shape (m,), matrices (n, m);
`point_shape` reports both as (rows, cols) with cols=1 for vectors. The flat
view is `x.ravel()`.
"""

from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from .errors import UsageError
from .rules import ensure_finite

Point = npt.NDArray[np.float64]


def as_point(values, shape: Optional[Tuple[int, ...]] = None) -> Point:
    """
    Convert array-like input to a finite float64 point.

    Args:
        values: Array-like data
        shape (Optional[Tuple[int, ...]]): Expected shape, checked when given

    Returns:
        Point: A new float64 array

    Raises:
        UsageError: If the shape does not match or entries are not finite
    """
    x = np.array(values, dtype=np.float64)
    if shape is not None and x.shape != tuple(shape):
        raise UsageError(f"expected shape {tuple(shape)}, got {x.shape}")
    if x.ndim not in (1, 2):
        raise UsageError(f"points are vectors or matrices, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise UsageError("point has non-finite entries")
    return x


def point_shape(x: Point) -> Tuple[int, int]:
    """Return (rows, cols) with cols=1 for vectors."""
    if x.ndim == 1:
        return (x.shape[0], 1)
    return (x.shape[0], x.shape[1])


def inner(a: Point, b: Point) -> float:
    """Frobenius inner product."""
    return float(np.vdot(a, b))


@ensure_finite("convex_step")
def convex_step(x: Point, s: Point, eta: float) -> Point:
    """
    Frank-Wolfe update (1 - eta) * x + eta * s.

    Args:
        x (Point): Current iterate
        s (Point): Vertex returned by the linear minimization oracle
        eta (float): Step size in [0, 1]

    Returns:
        Point: The new iterate

    Raises:
        UsageError: If shapes differ or eta is outside [0, 1]
    """
    if x.shape != s.shape:
        raise UsageError(f"shape mismatch: {x.shape} vs {s.shape}")
    if not 0.0 <= eta <= 1.0:
        raise UsageError(f"step size must lie in [0, 1], got {eta}")
    return (1.0 - eta) * x + eta * s
