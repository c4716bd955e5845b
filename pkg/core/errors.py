"""
Exception hierarchy shared by every bifrank package.

Each class also derives from the closest builtin exception so callers that
only know about ValueError or ArithmeticError keep working.
"""

from typing import List, Optional


class BifrankError(Exception):
    """Root of all errors raised by bifrank."""


class ConfigurationError(BifrankError, ValueError):
    """A schedule, problem or experiment configuration is invalid."""


class UsageError(BifrankError, ValueError):
    """An operation was called with arguments that violate its preconditions."""


class NumericError(BifrankError, ArithmeticError):
    """
    A computation produced NaN or Inf.

    Attributes:
        iteration (Optional[int]): Iteration at which the value was produced, if known
    """

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class SolverAborted(NumericError):
    """
    A solver stopped because an iterate or estimate stopped being finite.

    Attributes:
        last_point: The last finite iterate
        records (List): Records emitted before the abort
    """

    def __init__(self, message: str, iteration: int, last_point, records: List):
        super().__init__(message, iteration)
        self.last_point = last_point
        self.records = records


class CapabilityError(BifrankError, NotImplementedError):
    """The problem does not expose the requested exact quantity."""


class SamplingError(BifrankError, ValueError):
    """A minibatch or sample could not be drawn."""


class MetricError(BifrankError, ValueError):
    """A metric is undefined for the given inputs."""


class IngestError(BifrankError, ValueError):
    """A ratings file could not be read or has too many malformed lines."""
