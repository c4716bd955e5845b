"""
Reconstruction metrics.
"""

from typing import Tuple

import numpy as np

from core import MetricError, Point


def normalized_error(x: Point, reference: np.ndarray, omega: Tuple[np.ndarray, np.ndarray]) -> float:
    """
    Relative squared error over observed entries:
        sum_{(i,j) in omega} (X_ij - R_ij)^2 / sum_{(i,j) in omega} R_ij^2

    Args:
        x (Point): Estimate
        reference (np.ndarray): Ground truth or observed matrix
        omega (Tuple[np.ndarray, np.ndarray]): Row and column indices of the entries

    Returns:
        float: The ratio

    Raises:
        MetricError: If omega is empty or the reference vanishes on it
    """
    rows, cols = omega
    if len(rows) == 0:
        raise MetricError("normalized error needs a nonempty index set")
    truth = reference[rows, cols]
    denominator = float(np.sum(truth ** 2))
    if denominator == 0.0:
        raise MetricError("reference is zero on the index set")
    return float(np.sum((x[rows, cols] - truth) ** 2)) / denominator
