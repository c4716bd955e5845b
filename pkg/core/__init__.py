"""
Core numeric types shared by every other package: points, constraint sets,
schedules, random streams and the error hierarchy.
"""

from .constraints import (
    MEMBERSHIP_TOL,
    ConstraintKind,
    ConstraintSet,
    box,
    diameter,
    l1_ball,
    nuclear_norm_ball,
    simplex,
)
from .errors import (
    BifrankError,
    CapabilityError,
    ConfigurationError,
    IngestError,
    MetricError,
    NumericError,
    SamplingError,
    SolverAborted,
    UsageError,
)
from .points import Point, as_point, convex_step, inner, point_shape
from .rng import RngStream, SampleStreams, StreamId
from .rules import ensure_finite
from .schedules import Regime, Schedule, ScheduleSpec, schedule, sfw_schedule

__all__ = [
    'MEMBERSHIP_TOL', 'ConstraintKind', 'ConstraintSet', 'box', 'diameter',
    'l1_ball', 'nuclear_norm_ball', 'simplex',
    'BifrankError', 'CapabilityError', 'ConfigurationError', 'IngestError',
    'MetricError', 'NumericError', 'SamplingError', 'SolverAborted', 'UsageError',
    'Point', 'as_point', 'convex_step', 'inner', 'point_shape',
    'RngStream', 'SampleStreams', 'StreamId', 'ensure_finite',
    'Regime', 'Schedule', 'ScheduleSpec', 'schedule', 'sfw_schedule',
]
