"""
Abstract base classes for stochastic oracles.

This module defines the interfaces every problem must implement. Public
methods count the call and delegate to an abstract `_method` that the
concrete oracle provides, so SFO accounting is identical across problems.

Oracles never own randomness: each call receives the run's SampleStreams and
draws from the stream that matches the sample it represents (theta for outer
samples, xi for inner samples, hessian for second-order samples).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core import CapabilityError, ConfigurationError, Point, SampleStreams

from .counter import CallKind, OracleCallCounter


@dataclass(frozen=True)
class ExactPieces:
    """
    Population derivatives at (x, y) on a flattened basis.

    Attributes:
        grad_x_F (np.ndarray): Shape of x
        grad_y_F (np.ndarray): Shape of y
        hess_yy_G (np.ndarray): (n, n) dense Hessian in y, n = y.size
        hess_xy_G (np.ndarray): (m, n) dense cross Hessian, m = x.size
    """
    grad_x_F: np.ndarray
    grad_y_F: np.ndarray
    hess_yy_G: np.ndarray
    hess_xy_G: np.ndarray


class _ExactHooks(ABC):
    """Optional exact quantities; a problem overrides what it can compute."""

    @property
    @abstractmethod
    def outer_shape(self) -> Tuple[int, ...]:
        """Shape of the decision variable x."""
        raise NotImplementedError("Oracle must declare the decision variable shape")

    def objective(self, x: Point, y: Optional[Point] = None) -> Optional[float]:
        """Objective value, or an estimate of it from the inner iterate y."""
        return None

    def exact_gradient(self, x: Point) -> Optional[Point]:
        """Population gradient of the outer objective, if available."""
        return None

    def error_metric(self, x: Point) -> Optional[float]:
        """Problem-specific error such as the normalized reconstruction error."""
        return None


class BilevelOracle(_ExactHooks, ABC):
    """
    Sampling oracle for min_x F(x, y*(x)) with y*(x) = argmin_y G(y, x).

    Attributes:
        mu_g (float): Strong-convexity modulus of G in y
        L_g (float): Smoothness constant of G in y
        sigma_g_sq (float): Variance bound of grad_y g
        counter (OracleCallCounter): Calls made so far
    """

    def __init__(self, mu_g: float, L_g: float, sigma_g_sq: float = 0.0):
        """
        Initialize the oracle constants.

        Args:
            mu_g (float): Strong-convexity modulus, > 0
            L_g (float): Smoothness constant, >= mu_g
            sigma_g_sq (float): Inner gradient variance bound

        Raises:
            ConfigurationError: If the constants are inconsistent
        """
        if not mu_g > 0:
            raise ConfigurationError(f"mu_g must be positive, got {mu_g}")
        if L_g < mu_g:
            raise ConfigurationError(f"L_g ({L_g}) must be >= mu_g ({mu_g})")
        self.mu_g = float(mu_g)
        self.L_g = float(L_g)
        self.sigma_g_sq = float(sigma_g_sq)
        self.counter = OracleCallCounter()

    @property
    @abstractmethod
    def inner_shape(self) -> Tuple[int, ...]:
        """Shape of the inner variable y."""
        raise NotImplementedError("Oracle must declare the inner variable shape")

    def initial_inner(self, x: Point) -> Point:
        """Starting inner iterate y_1."""
        return np.zeros(self.inner_shape)

    def grad_x_f(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.OUTER)
        return self._grad_x_f(x, y, rng)

    def grad_y_f(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.OUTER)
        return self._grad_y_f(x, y, rng)

    def grad_y_g(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.INNER)
        return self._grad_y_g(x, y, rng)

    def hvp_yy_g(self, x: Point, y: Point, v: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.HESSIAN)
        return self._hvp_yy_g(x, y, v, rng)

    def cross_hvp_xy_g(self, x: Point, y: Point, v: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.HESSIAN)
        return self._cross_hvp_xy_g(x, y, v, rng)

    @abstractmethod
    def _grad_x_f(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        """Sample of grad_x f(x, y; theta), shape of x."""
        raise NotImplementedError("Oracle must implement _grad_x_f")

    @abstractmethod
    def _grad_y_f(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        """Sample of grad_y f(x, y; theta), shape of y."""
        raise NotImplementedError("Oracle must implement _grad_y_f")

    @abstractmethod
    def _grad_y_g(self, x: Point, y: Point, rng: SampleStreams) -> Point:
        """Sample of grad_y g(x, y; xi), shape of y."""
        raise NotImplementedError("Oracle must implement _grad_y_g")

    @abstractmethod
    def _hvp_yy_g(self, x: Point, y: Point, v: Point, rng: SampleStreams) -> Point:
        """Sampled grad^2_yy g(x, y; xi) applied to v; linear in v for a fixed sample."""
        raise NotImplementedError("Oracle must implement _hvp_yy_g")

    @abstractmethod
    def _cross_hvp_xy_g(self, x: Point, y: Point, v: Point, rng: SampleStreams) -> Point:
        """Sampled grad^2_xy g(x, y; xi) applied to v in y-space, result in x-space."""
        raise NotImplementedError("Oracle must implement _cross_hvp_xy_g")

    def inner_optimum(self, x: Point) -> Optional[Point]:
        """Exact y*(x), if available."""
        return None

    def exact_pieces(self, x: Point, y: Point) -> ExactPieces:
        """
        Population derivatives needed by the exact surrogate gradient.

        Raises:
            CapabilityError: Unless the problem overrides this method
        """
        raise CapabilityError(f"{type(self).__name__} does not expose exact derivatives")


class CompositionalOracle(_ExactHooks, ABC):
    """
    Sampling oracle for min_x f(E[h(x, xi)]) with f = E[f(., theta)].

    Attributes:
        sigma_h_sq (float): Variance bound of the inner-map samples
        counter (OracleCallCounter): Calls made so far
    """

    def __init__(self, sigma_h_sq: float = 0.0):
        self.sigma_h_sq = float(sigma_h_sq)
        self.counter = OracleCallCounter()

    @property
    @abstractmethod
    def map_shape(self) -> Tuple[int, ...]:
        """Shape of h(x)."""
        raise NotImplementedError("Oracle must declare the inner-map shape")

    def sample_h(self, x: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.MAP)
        return self._sample_h(x, rng)

    def vjp_h(self, x: Point, u: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.MAP)
        return self._vjp_h(x, u, rng)

    def grad_f(self, y: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.OUTER)
        return self._grad_f(y, rng)

    @abstractmethod
    def _sample_h(self, x: Point, rng: SampleStreams) -> Point:
        """Sample h(x, xi) using one xi draw."""
        raise NotImplementedError("Oracle must implement _sample_h")

    @abstractmethod
    def _vjp_h(self, x: Point, u: Point, rng: SampleStreams) -> Point:
        """grad h(x, xi)^T u; consumes the same kind of xi draw as _sample_h."""
        raise NotImplementedError("Oracle must implement _vjp_h")

    @abstractmethod
    def _grad_f(self, y: Point, rng: SampleStreams) -> Point:
        """Sample of grad f(y, theta)."""
        raise NotImplementedError("Oracle must implement _grad_f")

    def exact_h(self, x: Point) -> Optional[Point]:
        """Population inner map h(x), if available."""
        return None

    def exact_jacobian(self, x: Point) -> Optional[np.ndarray]:
        """Dense Jacobian of h at x with shape (h.size, x.size), if available."""
        return None

    def exact_grad_f(self, y: Point) -> Optional[Point]:
        """Population grad f(y), if available."""
        return None


class SingleLevelOracle(_ExactHooks, ABC):
    """Sampling oracle for a plain stochastic objective min_x E[f(x, theta)]."""

    def __init__(self):
        self.counter = OracleCallCounter()

    def grad(self, x: Point, rng: SampleStreams) -> Point:
        self.counter.increment(CallKind.OUTER)
        return self._grad(x, rng)

    @abstractmethod
    def _grad(self, x: Point, rng: SampleStreams) -> Point:
        """Sample of grad f(x, theta)."""
        raise NotImplementedError("Oracle must implement _grad")
