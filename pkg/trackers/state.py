"""
Mutable state carried between tracker updates.
"""

from dataclasses import dataclass

import numpy as np

from core import Point


@dataclass
class TrackerState:
    """
    Tracked quantities of one run.

    Attributes:
        d (Point): Tracked gradient estimate, shape of x
        y (Point): Inner iterate (bilevel) or inner-map estimate (compositional)
        prev_x (Point): Outer iterate of the previous iteration
        prev_y (Point): Value of y before its last update
    """
    d: Point
    y: Point
    prev_x: Point
    prev_y: Point

    @classmethod
    def initial(cls, d: Point, y: Point, x: Point) -> "TrackerState":
        return cls(d=np.array(d, dtype=np.float64), y=np.array(y, dtype=np.float64),
                   prev_x=np.array(x, dtype=np.float64), prev_y=np.array(y, dtype=np.float64))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.d)) and np.all(np.isfinite(self.y)))
