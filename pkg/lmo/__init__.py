"""
Linear minimization oracles and the Frank-Wolfe gap.
"""

from .linear import LmoResult, fw_gap, lmo, top_singular_pair

__all__ = ['LmoResult', 'fw_gap', 'lmo', 'top_singular_pair']
