"""
Synthetic problems with closed-form derivatives, used by the rate checks.

BilevelQuadratic
    G(y, x) = 1/2 (y - x)^T A (y - x),  A = diag(a)   so y*(x) = x
    F(x, y) = p/2 ||x - y||^2 + q/2 ||y - b||^2 + c^T x
    Q(x) = F(x, x) = q/2 ||x - b||^2 + c^T x
CompositionalQuadratic
    h(x, xi) = H x + sigma_h xi,  f(y) = 1/2 ||y - c||^2
NonconvexCompositionalToy
    h(x, xi) = A x - b + sigma_h xi,  f(y) = sum log(1 + y_i^2)
LinearObjective
    single-level f(x, theta) = c^T x + sigma theta^T x
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from core import (
    CapabilityError,
    ConfigurationError,
    ConstraintSet,
    Point,
    RngStream,
    SampleStreams,
    l1_ball,
)
from lmo import lmo
from oracles import BilevelOracle, CompositionalOracle, ExactPieces, SingleLevelOracle
from solvers.projections import project


def _noise(stream: RngStream, scale: float, size: int) -> np.ndarray:
    if scale == 0.0:
        return np.zeros(size)
    return scale * stream.standard_normal(size)


class BilevelQuadratic(BilevelOracle):
    """
    Quadratic bilevel testbed with y*(x) = x.

    Args:
        a (np.ndarray): Diagonal of the inner Hessian, entries > 0
        p (float): Weight of the coupling term of F
        q (float): Weight of the anchor term of F; q = 0 makes Q linear
        b (np.ndarray): Anchor
        c (np.ndarray): Linear term
        sigma_f (float): Outer gradient noise scale
        sigma_g (float): Inner gradient noise scale
        hessian_spread (float): Sampled Hessians are A diag(u), u ~ U[1 - s, 1 + s]
        L_g (Optional[float]): Declared smoothness, at least max(a) (1 + s)
    """

    def __init__(self, a, p: float = 1.0, q: float = 1.0, b=None, c=None,
                 sigma_f: float = 0.0, sigma_g: float = 0.0, hessian_spread: float = 0.0,
                 L_g: Optional[float] = None):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 1 or np.any(a <= 0):
            raise ConfigurationError("a must be a vector of positive entries")
        if not 0.0 <= hessian_spread < 1.0:
            raise ConfigurationError("hessian_spread must lie in [0, 1)")
        bound = float(np.max(a)) * (1.0 + hessian_spread)
        if L_g is not None and L_g < bound:
            raise ConfigurationError(f"L_g must be at least {bound}")
        super().__init__(mu_g=float(np.min(a)), L_g=bound if L_g is None else L_g,
                         sigma_g_sq=sigma_g ** 2 * a.size)
        self.a = a
        self.p = float(p)
        self.q = float(q)
        self.b = np.zeros(a.size) if b is None else np.asarray(b, dtype=np.float64)
        self.c = np.zeros(a.size) if c is None else np.asarray(c, dtype=np.float64)
        self.sigma_f = float(sigma_f)
        self.sigma_g = float(sigma_g)
        self.hessian_spread = float(hessian_spread)

    @property
    def outer_shape(self) -> Tuple[int, ...]:
        return (self.a.size,)

    @property
    def inner_shape(self) -> Tuple[int, ...]:
        return (self.a.size,)

    def _hessian_diag(self, rng: SampleStreams) -> np.ndarray:
        if self.hessian_spread == 0.0:
            return self.a
        s = self.hessian_spread
        return self.a * (1.0 + s * (2.0 * rng.hessian.random(self.a.size) - 1.0))

    def _grad_x_f(self, x, y, rng):
        return self.p * (x - y) + self.c + _noise(rng.theta, self.sigma_f, x.size)

    def _grad_y_f(self, x, y, rng):
        return -self.p * (x - y) + self.q * (y - self.b) + _noise(rng.theta, self.sigma_f, y.size)

    def _grad_y_g(self, x, y, rng):
        return self.a * (y - x) + _noise(rng.xi, self.sigma_g, y.size)

    def _hvp_yy_g(self, x, y, v, rng):
        return self._hessian_diag(rng) * v

    def _cross_hvp_xy_g(self, x, y, v, rng):
        return -self._hessian_diag(rng) * v

    def inner_optimum(self, x: Point) -> Point:
        return np.array(x, dtype=np.float64, copy=True)

    def objective(self, x: Point, y: Optional[Point] = None) -> float:
        return 0.5 * self.q * float(np.sum((x - self.b) ** 2)) + float(self.c @ x)

    def exact_gradient(self, x: Point) -> Point:
        return self.q * (x - self.b) + self.c

    def exact_pieces(self, x: Point, y: Point) -> ExactPieces:
        return ExactPieces(grad_x_F=self.p * (x - y) + self.c,
                           grad_y_F=-self.p * (x - y) + self.q * (y - self.b),
                           hess_yy_G=np.diag(self.a),
                           hess_xy_G=-np.diag(self.a))

    def optimum(self, constraint: ConstraintSet) -> Tuple[Point, float]:
        """Minimizer of Q over the set and the optimal value."""
        if self.q > 0:
            x_star = project(constraint, self.b - self.c / self.q)
        else:
            x_star = lmo(constraint, self.c).vertex
        return x_star, self.objective(x_star)


class CompositionalQuadratic(CompositionalOracle):
    """Least squares through a noisy linear map: C(x) = 1/2 ||H x - c||^2."""

    def __init__(self, H, c, sigma_h: float = 0.0, sigma_f: float = 0.0):
        H = np.asarray(H, dtype=np.float64)
        c = np.asarray(c, dtype=np.float64)
        if H.ndim != 2 or c.shape != (H.shape[0],):
            raise ConfigurationError("H must be (n, m) and c of length n")
        super().__init__(sigma_h_sq=sigma_h ** 2 * H.shape[0])
        self.H = H
        self.c = c
        self.sigma_h = float(sigma_h)
        self.sigma_f = float(sigma_f)

    @property
    def outer_shape(self) -> Tuple[int, ...]:
        return (self.H.shape[1],)

    @property
    def map_shape(self) -> Tuple[int, ...]:
        return (self.H.shape[0],)

    def _sample_h(self, x, rng):
        return self.H @ x + _noise(rng.xi, self.sigma_h, self.H.shape[0])

    def _vjp_h(self, x, u, rng):
        # additive noise; drawn only to stay aligned with sample_h
        _noise(rng.xi, self.sigma_h, self.H.shape[0])
        return self.H.T @ u

    def _grad_f(self, y, rng):
        return y - self.c + _noise(rng.theta, self.sigma_f, y.size)

    def exact_h(self, x):
        return self.H @ x

    def exact_jacobian(self, x):
        return self.H

    def exact_grad_f(self, y):
        return y - self.c

    def objective(self, x, y=None):
        return 0.5 * float(np.sum((self.H @ x - self.c) ** 2))

    def exact_gradient(self, x):
        return self.H.T @ (self.H @ x - self.c)

    def optimum(self, constraint: ConstraintSet) -> Tuple[Point, float]:
        """Minimizer over the set; available when H is the identity."""
        if self.H.shape[0] != self.H.shape[1] or not np.array_equal(self.H, np.eye(self.H.shape[0])):
            raise CapabilityError("closed-form optimum needs H = I")
        x_star = project(constraint, self.c)
        return x_star, self.objective(x_star)


class NonconvexCompositionalToy(CompositionalOracle):
    """C(x) = sum_i log(1 + (A x - b)_i^2), a smooth nonconvex objective."""

    def __init__(self, A, b, sigma_h: float = 0.0, sigma_f: float = 0.0):
        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ConfigurationError("A must be (n, m) and b of length n")
        super().__init__(sigma_h_sq=sigma_h ** 2 * A.shape[0])
        self.A = A
        self.b = b
        self.sigma_h = float(sigma_h)
        self.sigma_f = float(sigma_f)

    @property
    def outer_shape(self):
        return (self.A.shape[1],)

    @property
    def map_shape(self):
        return (self.A.shape[0],)

    def _sample_h(self, x, rng):
        return self.A @ x - self.b + _noise(rng.xi, self.sigma_h, self.A.shape[0])

    def _vjp_h(self, x, u, rng):
        _noise(rng.xi, self.sigma_h, self.A.shape[0])
        return self.A.T @ u

    def _grad_f(self, y, rng):
        return 2.0 * y / (1.0 + y ** 2) + _noise(rng.theta, self.sigma_f, y.size)

    def exact_h(self, x):
        return self.A @ x - self.b

    def exact_jacobian(self, x):
        return self.A

    def exact_grad_f(self, y):
        return 2.0 * y / (1.0 + y ** 2)

    def objective(self, x, y=None):
        return float(np.sum(np.log1p((self.A @ x - self.b) ** 2)))

    def exact_gradient(self, x):
        r = self.A @ x - self.b
        return self.A.T @ (2.0 * r / (1.0 + r ** 2))


class LinearObjective(SingleLevelOracle):
    """f(x, theta) = c^T x + sigma theta^T x."""

    def __init__(self, c, sigma: float = 0.0):
        super().__init__()
        self.c = np.asarray(c, dtype=np.float64)
        self.sigma = float(sigma)

    @property
    def outer_shape(self):
        return self.c.shape

    def _grad(self, x, rng):
        return self.c + _noise(rng.theta, self.sigma, self.c.size).reshape(self.c.shape)

    def objective(self, x, y=None):
        return float(np.vdot(self.c, x))

    def exact_gradient(self, x):
        return self.c.copy()


class SyntheticKind(Enum):
    BILEVEL_QUADRATIC = "bilevel_quadratic"
    COMPOSITIONAL_QUADRATIC = "compositional_quadratic"
    NONCONVEX_COMPOSITIONAL_TOY = "nonconvex_compositional_toy"


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Recipe for a testbed and its l1-ball feasible region.

    Attributes:
        kind (SyntheticKind): Which testbed
        dim (int): Dimension of x (and of y / h(x))
        mu_g, L_g (float): Spectrum range of the inner Hessian (bilevel only)
        p, q (float): Outer weights (bilevel only)
        sigma_f (float): Outer sample noise
        sigma_g (float): Inner sample noise (inner gradient or inner map)
        radius (float): l1-ball radius
    """
    kind: SyntheticKind = SyntheticKind.BILEVEL_QUADRATIC
    dim: int = 10
    mu_g: float = 1.0
    L_g: float = 2.0
    p: float = 1.0
    q: float = 1.0
    sigma_f: float = 0.1
    sigma_g: float = 0.1
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError("dim must be at least 1")
        if not 0 < self.mu_g <= self.L_g:
            raise ConfigurationError("need 0 < mu_g <= L_g")
        if self.sigma_f < 0 or self.sigma_g < 0:
            raise ConfigurationError("noise scales must be nonnegative")
        if not self.radius > 0:
            raise ConfigurationError("radius must be positive")

    def build(self, rng: RngStream):
        """
        Draw the testbed data.

        Returns:
            Tuple[oracle, ConstraintSet]
        """
        constraint = l1_ball((self.dim,), self.radius)
        if self.kind is SyntheticKind.BILEVEL_QUADRATIC:
            a = np.linspace(self.mu_g, self.L_g, self.dim)
            c = rng.standard_normal(self.dim)
            oracle = BilevelQuadratic(a, p=self.p, q=self.q, b=np.zeros(self.dim), c=c,
                                      sigma_f=self.sigma_f, sigma_g=self.sigma_g)
        elif self.kind is SyntheticKind.COMPOSITIONAL_QUADRATIC:
            direction = rng.standard_normal(self.dim)
            c = 0.5 * self.radius * direction / np.sum(np.abs(direction))
            oracle = CompositionalQuadratic(np.eye(self.dim), c,
                                            sigma_h=self.sigma_g, sigma_f=self.sigma_f)
        else:
            A = rng.standard_normal((self.dim, self.dim)) / np.sqrt(self.dim)
            b = rng.standard_normal(self.dim)
            oracle = NonconvexCompositionalToy(A, b, sigma_h=self.sigma_g, sigma_f=self.sigma_f)
        return oracle, constraint
