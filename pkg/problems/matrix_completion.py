"""
Matrix completion with denoising.

    min_{||X||_* <= alpha}  sum_{(i,j) in O1} (X_ij - Y*_ij)^2
    Y*(X) = argmin_V  sum_{(i,j) in O2} (V_ij - M_ij)^2 + lambda1 psi(V) + lambda2 ||X - V||_F^2

psi is the l1 norm, smoothed by default with the pseudo-Huber function
sqrt(v^2 + eps^2) - eps so the inner problem stays twice differentiable. The
stochastic oracle samples minibatches of observed entries uniformly with
replacement: the outer batch from the theta stream, the inner batch from xi,
Hessian batches from the hessian stream. A batch B of a set O estimates the
sum over O as |O|/|B| times the sum over B.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from core import ConfigurationError, Point, RngStream, SampleStreams, nuclear_norm_ball
from ingest import RatingsDataset, sample_positions
from oracles import BilevelOracle, ExactPieces, SingleLevelOracle

from .metrics import normalized_error

logger = logging.getLogger(__name__)

SMOOTHING_EPS = 1e-3
BISECTION_STEPS = 100


@dataclass(frozen=True, eq=False)
class MatrixCompletionProblem:
    """
    Data of one matrix completion instance.

    Attributes:
        M (np.ndarray): Observed matrix, zero off the observed set
        omega1 (Tuple[np.ndarray, np.ndarray]): Entries of the outer objective
        omega2 (Tuple[np.ndarray, np.ndarray]): Entries of the inner objective
        lambda1 (float): Weight of the sparse-noise term
        lambda2 (float): Weight of the coupling term, > 0
        alpha (float): Nuclear-ball radius
        b1 (int): Outer batch size
        b2 (int): Inner batch size
        epsilon_l1 (float): Pseudo-Huber width
        smoothing (str): "pseudo_huber" or "subgradient"
        truth (Optional[np.ndarray]): Ground truth for the error metric; M is used when absent
    """
    M: np.ndarray
    omega1: Tuple[np.ndarray, np.ndarray]
    omega2: Tuple[np.ndarray, np.ndarray]
    lambda1: float = 0.05
    lambda2: float = 0.05
    alpha: float = 1.0
    b1: int = 50
    b2: int = 50
    epsilon_l1: float = SMOOTHING_EPS
    smoothing: str = "pseudo_huber"
    truth: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.M.ndim != 2:
            raise ConfigurationError("M must be a matrix")
        for name in ("omega1", "omega2"):
            rows, cols = getattr(self, name)
            if len(rows) == 0 or len(rows) != len(cols):
                raise ConfigurationError(f"{name} must be a nonempty pair of index arrays")
            if rows.min() < 0 or cols.min() < 0 or rows.max() >= self.M.shape[0] or cols.max() >= self.M.shape[1]:
                raise ConfigurationError(f"{name} has indices outside the matrix")
        if not self.alpha > 0:
            raise ConfigurationError("alpha must be positive")
        if not self.lambda2 > 0:
            raise ConfigurationError("lambda2 must be positive for a strongly convex inner problem")
        if self.lambda1 < 0:
            raise ConfigurationError("lambda1 must be nonnegative")
        if not self.epsilon_l1 > 0:
            raise ConfigurationError("epsilon_l1 must be positive")
        if self.smoothing not in ("pseudo_huber", "subgradient"):
            raise ConfigurationError(f"unknown smoothing {self.smoothing!r}")
        if self.b1 < 1 or self.b2 < 1:
            raise ConfigurationError("batch sizes must be at least 1")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.M.shape

    def constraint(self):
        return nuclear_norm_ball(self.shape, self.alpha)

    def reference(self) -> np.ndarray:
        return self.M if self.truth is None else self.truth


def matcomp_synthetic(n: int, r: int, noise_factor: float, observe_prob: float, rng: RngStream,
                      **options) -> Tuple[MatrixCompletionProblem, np.ndarray]:
    """
    Low-rank ground truth plus symmetric noise.

    X_hat = W W^T with W ~ N(0, 1)^{n x r}, M = X_hat + noise_factor (L + L^T)
    with L ~ N(0, 1)^{n x n}; each entry is observed independently with
    probability observe_prob and alpha = ||X_hat||_*.

    Args:
        n (int): Matrix size
        r (int): Rank of the ground truth
        noise_factor (float): Noise scale in [0, 1)
        observe_prob (float): Observation probability in (0, 1]
        rng (RngStream): Data stream
        **options: Other MatrixCompletionProblem fields (lambda1, b1, ...)

    Returns:
        Tuple[MatrixCompletionProblem, np.ndarray]: Problem and X_hat

    Raises:
        ConfigurationError: On invalid sizes or probabilities
    """
    if not n >= r >= 1:
        raise ConfigurationError(f"need n >= r >= 1, got n={n}, r={r}")
    if not 0.0 <= noise_factor < 1.0:
        raise ConfigurationError(f"noise_factor must lie in [0, 1), got {noise_factor}")
    if not 0.0 < observe_prob <= 1.0:
        raise ConfigurationError(f"observe_prob must lie in (0, 1], got {observe_prob}")
    W = rng.standard_normal((n, r))
    truth = W @ W.T
    L = rng.standard_normal((n, n))
    noisy = truth + noise_factor * (L + L.T)
    mask = rng.random((n, n)) < observe_prob
    if not mask.any():
        mask.flat[int(rng.integers(0, n * n))] = True
    omega = np.nonzero(mask)
    M = np.where(mask, noisy, 0.0)
    alpha = float(np.sum(linalg.svdvals(truth)))
    problem = MatrixCompletionProblem(M=M, omega1=omega, omega2=omega, alpha=alpha,
                                      truth=truth, **options)
    logger.info("synthetic matrix completion: n=%d r=%d noise=%.2f observed=%d alpha=%.3g",
                n, r, noise_factor, len(omega[0]), alpha)
    return problem, truth


def matcomp_from_ratings(dataset: RatingsDataset, alpha: Optional[float] = None,
                         **options) -> MatrixCompletionProblem:
    """
    Matrix completion over a ratings dataset; the error metric is measured against M.

    alpha defaults to the nuclear norm of the observed matrix.
    """
    M = dataset.to_matrix()
    omega = (dataset.users.copy(), dataset.items.copy())
    if alpha is None:
        alpha = float(np.sum(linalg.svdvals(M)))
    return MatrixCompletionProblem(M=M, omega1=omega, omega2=omega, alpha=alpha, **options)


def _counts(shape: Tuple[int, int], omega: Tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    weights = np.zeros(shape)
    np.add.at(weights, omega, 1.0)
    return weights


class MatrixCompletionOracle(BilevelOracle):
    """Minibatch bilevel oracle of a MatrixCompletionProblem."""

    def __init__(self, problem: MatrixCompletionProblem):
        smooth = problem.smoothing == "pseudo_huber"
        # w_ij = multiplicity of (i, j) in omega
        w1 = _counts(problem.shape, problem.omega1)
        w2 = _counts(problem.shape, problem.omega2)
        scale2 = len(problem.omega2[0]) / problem.b2
        # a sampled data Hessian puts at most 2 |O2| / b2 on an entry drawn once
        L_g = (2.0 * max(scale2, float(w2.max())) + (problem.lambda1 / problem.epsilon_l1 if smooth else 0.0)
               + 2.0 * problem.lambda2)
        super().__init__(mu_g=2.0 * problem.lambda2, L_g=L_g,
                         sigma_g_sq=4.0 * scale2 * float(np.sum(w2 * problem.M ** 2)))
        self.problem = problem
        self.smooth = smooth
        self._w1 = w1
        self._w2 = w2
        self._scale1 = len(problem.omega1[0]) / problem.b1
        self._scale2 = scale2

    @property
    def outer_shape(self):
        return self.problem.shape

    @property
    def inner_shape(self):
        return self.problem.shape

    def initial_inner(self, x: Point) -> Point:
        return np.array(x, dtype=np.float64, copy=True)

    def _batch(self, omega, b: int, stream: RngStream):
        positions = sample_positions(len(omega[0]), b, stream)
        return omega[0][positions], omega[1][positions]

    def _scatter(self, rows, cols, values) -> np.ndarray:
        out = np.zeros(self.problem.shape)
        np.add.at(out, (rows, cols), values)
        return out

    def _psi_grad(self, v: np.ndarray) -> np.ndarray:
        if not self.smooth:
            return np.sign(v)
        return v / np.sqrt(v ** 2 + self.problem.epsilon_l1 ** 2)

    def _psi_hess(self, v: np.ndarray) -> np.ndarray:
        if not self.smooth:
            return np.zeros_like(v)
        eps_sq = self.problem.epsilon_l1 ** 2
        return eps_sq / (v ** 2 + eps_sq) ** 1.5

    def _grad_x_f(self, x, y, rng):
        rows, cols = self._batch(self.problem.omega1, self.problem.b1, rng.theta)
        return self._scatter(rows, cols, 2.0 * self._scale1 * (x[rows, cols] - y[rows, cols]))

    def _grad_y_f(self, x, y, rng):
        return -self._grad_x_f(x, y, rng)

    def _grad_y_g(self, x, y, rng):
        p = self.problem
        rows, cols = self._batch(p.omega2, p.b2, rng.xi)
        data = self._scatter(rows, cols, 2.0 * self._scale2 * (y[rows, cols] - p.M[rows, cols]))
        return data + p.lambda1 * self._psi_grad(y) + 2.0 * p.lambda2 * (y - x)

    def _hvp_yy_g(self, x, y, v, rng):
        p = self.problem
        rows, cols = self._batch(p.omega2, p.b2, rng.hessian)
        data = self._scatter(rows, cols, 2.0 * self._scale2 * v[rows, cols])
        return data + p.lambda1 * self._psi_hess(y) * v + 2.0 * p.lambda2 * v

    def _cross_hvp_xy_g(self, x, y, v, rng):
        return -2.0 * self.problem.lambda2 * v

    def _hess_diag(self, y: Point) -> np.ndarray:
        p = self.problem
        return 2.0 * self._w2 + p.lambda1 * self._psi_hess(y) + 2.0 * p.lambda2

    def inner_optimum(self, x: Point) -> Point:
        """
        Exact Y*(X). The inner objective is separable, so every entry solves a
        scalar strictly convex problem: closed form when lambda1 = 0 or in
        subgradient mode, bisection on the derivative otherwise.
        """
        p = self.problem
        w = self._w2
        blend = (w * p.M + p.lambda2 * x) / (w + p.lambda2)
        if p.lambda1 == 0.0:
            return blend
        if not self.smooth:
            shrink = p.lambda1 / (2.0 * (w + p.lambda2))
            return np.sign(blend) * np.maximum(np.abs(blend) - shrink, 0.0)
        reach = p.lambda1 / (2.0 * p.lambda2)
        lo = np.minimum(np.where(w > 0, p.M, x), x) - reach
        hi = np.maximum(np.where(w > 0, p.M, x), x) + reach
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            slope = 2.0 * w * (mid - p.M) + p.lambda1 * self._psi_grad(mid) + 2.0 * p.lambda2 * (mid - x)
            positive = slope > 0
            hi = np.where(positive, mid, hi)
            lo = np.where(positive, lo, mid)
        return 0.5 * (lo + hi)

    def outer_value(self, x: Point, y: Point) -> float:
        return float(np.sum(self._w1 * (x - y) ** 2))

    def objective(self, x: Point, y: Optional[Point] = None) -> Optional[float]:
        """F(X, Y) with the tracked inner iterate; F(X, Y*(X)) when y is None."""
        return self.outer_value(x, self.inner_optimum(x) if y is None else y)

    def exact_pieces(self, x: Point, y: Point) -> ExactPieces:
        grad_x = 2.0 * self._w1 * (x - y)
        size = x.size
        return ExactPieces(grad_x_F=grad_x, grad_y_F=-grad_x,
                           hess_yy_G=np.diag(self._hess_diag(y).ravel()),
                           hess_xy_G=-2.0 * self.problem.lambda2 * np.eye(size))

    def exact_gradient(self, x: Point) -> Optional[Point]:
        """Population gradient of X -> F(X, Y*(X)); the inner Hessian is diagonal."""
        if not self.smooth and self.problem.lambda1 > 0:
            return None
        y = self.inner_optimum(x)
        grad_x = 2.0 * self._w1 * (x - y)
        return grad_x + 2.0 * self.problem.lambda2 * (-grad_x) / self._hess_diag(y)

    def error_metric(self, x: Point) -> float:
        return normalized_error(x, self.problem.reference(), self.problem.omega1)


def matcomp_bilevel_oracle(problem: MatrixCompletionProblem) -> MatrixCompletionOracle:
    return MatrixCompletionOracle(problem)


class MatrixCompletionLeastSquares(SingleLevelOracle):
    """
    Plain completion without denoising: f(X) = sum_{O1} (X_ij - M_ij)^2,
    sampled on outer minibatches.
    """

    def __init__(self, problem: MatrixCompletionProblem):
        super().__init__()
        self.problem = problem
        self._w1 = _counts(problem.shape, problem.omega1)
        self._scale1 = len(problem.omega1[0]) / problem.b1

    @property
    def outer_shape(self):
        return self.problem.shape

    def _grad(self, x, rng: SampleStreams):
        p = self.problem
        positions = sample_positions(len(p.omega1[0]), p.b1, rng.theta)
        rows, cols = p.omega1[0][positions], p.omega1[1][positions]
        out = np.zeros(p.shape)
        np.add.at(out, (rows, cols), 2.0 * self._scale1 * (x[rows, cols] - p.M[rows, cols]))
        return out

    def objective(self, x, y=None):
        return float(np.sum(self._w1 * (x - self.problem.M) ** 2))

    def exact_gradient(self, x):
        return 2.0 * self._w1 * (x - self.problem.M)

    def error_metric(self, x):
        return normalized_error(x, self.problem.reference(), self.problem.omega1)
