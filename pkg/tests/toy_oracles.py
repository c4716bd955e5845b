"""
Small hand-checkable oracles shared by the tests.
"""

import numpy as np

from oracles import BilevelOracle, CompositionalOracle, ExactPieces


class ScalarBilevel(BilevelOracle):
    """
    One-dimensional bilevel problem with deterministic derivatives:
        g(x, y) = mu/2 y^2 + cross * x y,  f(x, y) = y
    so grad_y f = 1, hess_yy = mu, hess_xy = cross, y*(x) = -cross x / mu
    and the hypergradient is -cross / mu.
    """

    def __init__(self, mu: float = 1.0, L: float = 2.0, cross: float = 1.0):
        super().__init__(mu_g=mu, L_g=L)
        self.mu = mu
        self.cross = cross

    @property
    def outer_shape(self):
        return (1,)

    @property
    def inner_shape(self):
        return (1,)

    def _grad_x_f(self, x, y, rng):
        return np.zeros(1)

    def _grad_y_f(self, x, y, rng):
        return np.ones(1)

    def _grad_y_g(self, x, y, rng):
        return self.mu * y + self.cross * x

    def _hvp_yy_g(self, x, y, v, rng):
        return self.mu * v

    def _cross_hvp_xy_g(self, x, y, v, rng):
        return self.cross * v

    def inner_optimum(self, x):
        return -self.cross * x / self.mu

    def objective(self, x, y=None):
        return float(self.inner_optimum(x)[0])

    def exact_gradient(self, x):
        return np.array([-self.cross / self.mu])

    def exact_pieces(self, x, y):
        return ExactPieces(grad_x_F=np.zeros(1), grad_y_F=np.ones(1),
                           hess_yy_G=np.array([[self.mu]]), hess_xy_G=np.array([[self.cross]]))


class NoisyIdentityMap(CompositionalOracle):
    """h(x, xi) = x + xi with xi ~ N(0, 1) per coordinate, f(y) = 1/2 ||y||^2."""

    def __init__(self, dim: int = 3):
        super().__init__(sigma_h_sq=float(dim))
        self.dim = dim

    @property
    def outer_shape(self):
        return (self.dim,)

    @property
    def map_shape(self):
        return (self.dim,)

    def _sample_h(self, x, rng):
        return x + rng.xi.standard_normal(self.dim)

    def _vjp_h(self, x, u, rng):
        rng.xi.standard_normal(self.dim)
        return u.copy()

    def _grad_f(self, y, rng):
        return y.copy()
