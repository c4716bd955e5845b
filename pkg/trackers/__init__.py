"""
Momentum trackers and the inner SGD step.
"""

from .momentum import (
    bilevel_track,
    compositional_gradient_sample,
    compositional_track_d,
    compositional_track_y,
    inner_sgd_step,
)
from .state import TrackerState

__all__ = [
    'TrackerState', 'bilevel_track', 'compositional_gradient_sample',
    'compositional_track_d', 'compositional_track_y', 'inner_sgd_step',
]
