"""
Rating-file ingestion and minibatch sampling.
"""

from .minibatch import minibatch, sample_positions
from .movielens import MALFORMED_THRESHOLD, RatingsDataset, RatingsFormat, parse_movielens

__all__ = [
    'MALFORMED_THRESHOLD', 'RatingsDataset', 'RatingsFormat', 'parse_movielens',
    'minibatch', 'sample_positions',
]
