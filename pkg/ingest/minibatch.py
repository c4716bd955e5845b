"""
Seeded minibatches of observed entries.
"""

from typing import Union

import numpy as np

from core import RngStream, SamplingError

from .movielens import RatingsDataset


def sample_positions(count: int, b: int, rng: RngStream) -> np.ndarray:
    """
    Draw b positions i.i.d. uniform with replacement from range(count).

    Raises:
        SamplingError: If count or b is not positive
    """
    if count < 1:
        raise SamplingError("cannot sample from an empty entry set")
    if b < 1:
        raise SamplingError(f"batch size must be at least 1, got {b}")
    return rng.integers(0, count, size=b)


def minibatch(entries: Union[RatingsDataset, np.ndarray], b: int, rng: RngStream) -> np.ndarray:
    """
    Draw b observed (i, j) index pairs uniformly with replacement.

    Args:
        entries: A RatingsDataset or an (N, 2) integer array of (row, col) pairs
        b (int): Batch size
        rng (RngStream): Sample stream

    Returns:
        np.ndarray: (b, 2) integer array of index pairs
    """
    if isinstance(entries, RatingsDataset):
        pairs = np.column_stack([entries.users, entries.items])
    else:
        pairs = np.asarray(entries, dtype=np.int64).reshape(-1, 2)
    return pairs[sample_positions(len(pairs), b, rng)]
