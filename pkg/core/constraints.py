"""
Feasible regions consumed by the linear minimization oracles.

A ConstraintSet is an immutable, tagged description of one of four convex
compact sets: the l1 ball, the nuclear-norm ball, the (scaled) probability
simplex and a coordinate box.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import ConfigurationError, UsageError
from .points import Point

# Relative tolerance used by every membership test.
MEMBERSHIP_TOL = 1e-9


class ConstraintKind(Enum):
    """Supported feasible regions."""
    L1_BALL = "l1_ball"
    NUCLEAR_NORM_BALL = "nuclear_norm_ball"
    SIMPLEX = "simplex"
    BOX = "box"


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """
    Description of the feasible region X.

    Attributes:
        kind (ConstraintKind): Which set this is
        shape (Tuple[int, ...]): Expected point shape
        radius (float): Ball radius, or simplex total mass
        lo (Optional[np.ndarray]): Lower bounds (box only)
        hi (Optional[np.ndarray]): Upper bounds (box only)
    """
    kind: ConstraintKind
    shape: Tuple[int, ...]
    radius: float = 1.0
    lo: Optional[np.ndarray] = field(default=None, repr=False)
    hi: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.shape or any(int(d) < 1 for d in self.shape):
            raise ConfigurationError(f"invalid shape {self.shape}")
        if self.kind is ConstraintKind.BOX:
            if self.lo is None or self.hi is None:
                raise ConfigurationError("box needs lo and hi bounds")
            if self.lo.shape != tuple(self.shape) or self.hi.shape != tuple(self.shape):
                raise ConfigurationError("box bounds must match the point shape")
            if np.any(self.lo > self.hi):
                raise ConfigurationError("box bounds need lo <= hi coordinatewise")
            if not np.any(self.hi > self.lo):
                raise ConfigurationError("box has zero diameter")
        else:
            if not self.radius > 0:
                raise ConfigurationError(f"radius must be positive, got {self.radius}")
        if self.kind is ConstraintKind.NUCLEAR_NORM_BALL and len(self.shape) != 2:
            raise ConfigurationError("nuclear-norm ball needs a matrix shape")
        if self.kind is ConstraintKind.SIMPLEX and int(np.prod(self.shape)) < 2:
            raise ConfigurationError("simplex needs at least two coordinates")

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def tolerance(self) -> float:
        """Absolute membership slack derived from MEMBERSHIP_TOL."""
        if self.kind is ConstraintKind.BOX:
            scale = max(float(np.max(np.abs(self.lo))), float(np.max(np.abs(self.hi))))
        else:
            scale = self.radius
        return MEMBERSHIP_TOL * max(1.0, scale)

    def contains(self, x: Point, tol: Optional[float] = None) -> bool:
        """
        Membership test with relative tolerance.

        Args:
            x (Point): Candidate point
            tol (Optional[float]): Absolute slack, defaults to tolerance()

        Returns:
            bool: True if x lies in the set up to the slack
        """
        if x.shape != tuple(self.shape):
            raise UsageError(f"expected shape {tuple(self.shape)}, got {x.shape}")
        if not np.all(np.isfinite(x)):
            return False
        slack = self.tolerance() if tol is None else tol
        if self.kind is ConstraintKind.L1_BALL:
            return float(np.sum(np.abs(x))) <= self.radius + slack
        if self.kind is ConstraintKind.NUCLEAR_NORM_BALL:
            return float(np.sum(linalg.svdvals(x))) <= self.radius + slack
        if self.kind is ConstraintKind.SIMPLEX:
            return bool(np.all(x >= -slack)) and abs(float(np.sum(x)) - self.radius) <= slack
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def canonical_vertex(self) -> Point:
        """
        Deterministic extreme point returned by the LMO for a zero direction.

        +radius * e_0 for the l1 ball and simplex, radius * e_0 e_0^T for the
        nuclear ball and the lo corner for a box.
        """
        if self.kind is ConstraintKind.BOX:
            return self.lo.astype(np.float64, copy=True)
        vertex = np.zeros(self.shape)
        vertex.flat[0] = self.radius
        return vertex


def l1_ball(shape, radius: float = 1.0) -> ConstraintSet:
    return ConstraintSet(ConstraintKind.L1_BALL, _as_shape(shape), radius=float(radius))


def nuclear_norm_ball(shape, radius: float = 1.0) -> ConstraintSet:
    return ConstraintSet(ConstraintKind.NUCLEAR_NORM_BALL, _as_shape(shape), radius=float(radius))


def simplex(shape, radius: float = 1.0) -> ConstraintSet:
    return ConstraintSet(ConstraintKind.SIMPLEX, _as_shape(shape), radius=float(radius))


def box(lo, hi, shape=None) -> ConstraintSet:
    """
    Build a coordinate box.

    Args:
        lo: Scalar or array of lower bounds
        hi: Scalar or array of upper bounds
        shape: Point shape; required when both bounds are scalars

    Returns:
        ConstraintSet: The box
    """
    if shape is None:
        shape = np.shape(lo) if np.ndim(lo) else np.shape(hi)
    shape = _as_shape(shape)
    lo_arr = np.broadcast_to(np.asarray(lo, dtype=np.float64), shape).copy()
    hi_arr = np.broadcast_to(np.asarray(hi, dtype=np.float64), shape).copy()
    return ConstraintSet(ConstraintKind.BOX, shape, lo=lo_arr, hi=hi_arr)


def diameter(constraint: ConstraintSet) -> float:
    """
    Exact Euclidean (Frobenius) diameter of the set.

    Args:
        constraint (ConstraintSet): The feasible region

    Returns:
        float: 2*radius for both balls, radius*sqrt(2) for the simplex and
        ||hi - lo|| for a box
    """
    if constraint.kind in (ConstraintKind.L1_BALL, ConstraintKind.NUCLEAR_NORM_BALL):
        return 2.0 * constraint.radius
    if constraint.kind is ConstraintKind.SIMPLEX:
        return constraint.radius * math.sqrt(2.0)
    return float(np.linalg.norm(constraint.hi - constraint.lo))


def _as_shape(shape) -> Tuple[int, ...]:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(int(d) for d in shape)
