"""
Decorators that enforce numeric invariants on public operations.
"""

import functools

import numpy as np

from .errors import NumericError


def ensure_finite(operation: str):
    """Decorator rejecting NaN/Inf in the array returned by an operation.

    Args:
        operation (str): Name reported in the error message

    Returns:
        The decorated function; it raises NumericError when its result is not finite
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            result = func(*args, **kwargs)
            if not np.all(np.isfinite(result)):
                raise NumericError(f"{operation} produced a non-finite value")
            return result
        return wrapper
    return decorator
