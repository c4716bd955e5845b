"""
Stochastic oracle interfaces and hypergradient estimators.
"""

from .adapters import CompositionalBilevelOracle
from .base_oracle import BilevelOracle, CompositionalOracle, ExactPieces, SingleLevelOracle
from .counter import CallKind, OracleCallCounter
from .hypergradient import (
    hypergradient_sample,
    neumann_inverse_apply,
    neumann_product,
    surrogate_gradient_exact,
)

__all__ = [
    'BilevelOracle', 'CompositionalOracle', 'SingleLevelOracle', 'ExactPieces',
    'CompositionalBilevelOracle', 'CallKind', 'OracleCallCounter',
    'hypergradient_sample', 'neumann_inverse_apply', 'neumann_product',
    'surrogate_gradient_exact',
]
