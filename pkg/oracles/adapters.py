"""
Bilevel view of a compositional problem.

min_x f(E[h(x, xi)]) is the bilevel problem with inner objective
g(y; x, xi) = 1/2 ||y - h(x, xi)||^2 (so y*(x) = h(x), mu_g = L_g = 1) and outer
objective F(x, y) = f(y). Wrapping a CompositionalOracle this way lets SBFW run
on any compositional problem.
"""

from typing import Optional, Tuple

import numpy as np

from core import CapabilityError, Point, SampleStreams

from .base_oracle import BilevelOracle, CompositionalOracle, ExactPieces


class CompositionalBilevelOracle(BilevelOracle):
    """
    Adapter from CompositionalOracle to BilevelOracle.

    Calls go to the wrapped oracle's private sampling methods so each sample is
    counted once, on this adapter's counter.
    """

    def __init__(self, compositional: CompositionalOracle):
        super().__init__(mu_g=1.0, L_g=1.0, sigma_g_sq=compositional.sigma_h_sq)
        self.compositional = compositional

    @property
    def outer_shape(self) -> Tuple[int, ...]:
        return tuple(self.compositional.outer_shape)

    @property
    def inner_shape(self) -> Tuple[int, ...]:
        return tuple(self.compositional.map_shape)

    def _grad_x_f(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        return np.zeros_like(x, dtype=np.float64)

    def _grad_y_f(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        return self.compositional._grad_f(y, rng)

    def _grad_y_g(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        return y - self.compositional._sample_h(x, rng)

    def _hvp_yy_g(self, x: Point, y: Point, v: Point, rng: SampleStreams) -> Point:
        return np.array(v, dtype=np.float64, copy=True)

    def _cross_hvp_xy_g(self, x: Point, y: Point, v: Point, rng: SampleStreams) -> Point:
        return -self.compositional._vjp_h(x, v, rng)

    def objective(self, x: Point, y: Optional[Point] = None) -> Optional[float]:
        return self.compositional.objective(x, y)

    def exact_gradient(self, x: Point) -> Optional[Point]:
        return self.compositional.exact_gradient(x)

    def error_metric(self, x: Point) -> Optional[float]:
        return self.compositional.error_metric(x)

    def inner_optimum(self, x: Point) -> Optional[Point]:
        return self.compositional.exact_h(x)

    def exact_pieces(self, x: Point, y: Point) -> ExactPieces:
        jacobian = self.compositional.exact_jacobian(x)
        grad_f = self.compositional.exact_grad_f(y)
        if jacobian is None or grad_f is None:
            raise CapabilityError(
                f"{type(self.compositional).__name__} does not expose an exact Jacobian")
        n = int(np.prod(self.inner_shape))
        return ExactPieces(grad_x_F=np.zeros_like(x, dtype=np.float64),
                           grad_y_F=np.asarray(grad_f, dtype=np.float64),
                           hess_yy_G=np.eye(n),
                           hess_xy_G=-np.asarray(jacobian).T)
