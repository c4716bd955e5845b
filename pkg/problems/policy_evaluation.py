"""
Sparse policy evaluation with linear features.

    min_{||w||_1 <= alpha}  sum_s ( phi_s^T w - E_{s'~P_pi(.|s)}[ r(s, s') + gamma phi_{s'}^T w ] )^2

written as f(h(w)) with h(w)_s the Bellman residual of state s and
f(y) = ||y||^2. A sample of h draws one next state per state.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from core import ConfigurationError, Point, RngStream, SampleStreams, l1_ball
from oracles import CompositionalOracle
from solvers import Algorithm, SolverConfig, run_scfw

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PolicyEvalProblem:
    """
    A finite MDP, a fixed policy and a feature map.

    Attributes:
        P (np.ndarray): Transition kernel, shape (S, A, S)
        policy (np.ndarray): Action distribution per state, shape (S, A)
        R (np.ndarray): Rewards r(s, s') in [0, 1], shape (S, S)
        gamma (float): Discount in (0, 1)
        Phi (np.ndarray): Features, shape (S, m)
        alpha (float): l1-ball radius
        deterministic_mode (bool): Replace samples by exact expectations
    """
    P: np.ndarray
    policy: np.ndarray
    R: np.ndarray
    gamma: float
    Phi: np.ndarray
    alpha: float = 0.1
    deterministic_mode: bool = False

    def __post_init__(self):
        S = self.P.shape[0]
        if self.P.ndim != 3 or self.P.shape[2] != S:
            raise ConfigurationError("P must have shape (S, A, S)")
        if self.policy.shape != self.P.shape[:2]:
            raise ConfigurationError("policy must have shape (S, A)")
        if self.R.shape != (S, S):
            raise ConfigurationError("R must have shape (S, S)")
        if self.Phi.ndim != 2 or self.Phi.shape[0] != S:
            raise ConfigurationError("Phi must have one row per state")
        if np.any(self.P < 0) or np.max(np.abs(self.P.sum(axis=2) - 1.0)) > ROW_SUM_TOL:
            raise ConfigurationError("each P(.|s, a) must be a distribution")
        if np.any(self.policy < 0) or np.max(np.abs(self.policy.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ConfigurationError("each policy row must be a distribution")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigurationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.alpha > 0:
            raise ConfigurationError("alpha must be positive")

    @property
    def n_states(self) -> int:
        return self.P.shape[0]

    @property
    def transition(self) -> np.ndarray:
        """State-to-state kernel P_pi(s' | s) of the policy."""
        return np.einsum("sa,sat->st", self.policy, self.P)

    @property
    def expected_reward(self) -> np.ndarray:
        return np.sum(self.transition * self.R, axis=1)

    def value_function(self) -> np.ndarray:
        """V_pi from the linear Bellman equation (I - gamma P_pi) V = r_bar."""
        return np.linalg.solve(np.eye(self.n_states) - self.gamma * self.transition, self.expected_reward)

    def constraint(self):
        return l1_ball((self.Phi.shape[1],), self.alpha)


def _normalize_rows(matrix: np.ndarray) -> np.ndarray:
    return matrix / matrix.sum(axis=-1, keepdims=True)


def policy_eval_problem(n_states: int = 100, n_actions: int = 3, n_features: int = 100,
                        gamma: float = 0.9, alpha: float = 0.1, favored_prob: float = 0.9,
                        rng: Optional[RngStream] = None,
                        deterministic_mode: bool = False) -> PolicyEvalProblem:
    """
    Random MDP where the policy favors one action per state.

    Transitions are normalized uniform draws, rewards are uniform in [0, 1]
    and feature rows are standard normal scaled to unit norm.
    """
    if n_states < 1 or n_actions < 1 or n_features < 1:
        raise ConfigurationError("state, action and feature counts must be positive")
    if not 0.0 < favored_prob <= 1.0:
        raise ConfigurationError("favored_prob must lie in (0, 1]")
    rng = rng if rng is not None else RngStream(0, "data")
    P = _normalize_rows(rng.random((n_states, n_actions, n_states)) + 1e-12)
    favored = rng.integers(0, n_actions, size=n_states)
    if n_actions == 1:
        policy = np.ones((n_states, 1))
    else:
        policy = np.full((n_states, n_actions), (1.0 - favored_prob) / (n_actions - 1))
        policy[np.arange(n_states), favored] = favored_prob
    R = rng.random((n_states, n_states))
    Phi = rng.standard_normal((n_states, n_features))
    Phi /= np.linalg.norm(Phi, axis=1, keepdims=True)
    return PolicyEvalProblem(P=P, policy=policy, R=R, gamma=gamma, Phi=Phi, alpha=alpha,
                             deterministic_mode=deterministic_mode)


class PolicyEvaluationOracle(CompositionalOracle):
    """
    Bellman-residual sampling oracle.

    sample_h and vjp_h each draw one uniform per state from the xi stream and
    map it to a next state through the inverse CDF of P_pi, so a replayed
    stream gives both calls the same next states.
    """

    def __init__(self, problem: PolicyEvalProblem, w_star: Optional[Point] = None):
        self.problem = problem
        self.w_star = None if w_star is None else np.asarray(w_star, dtype=np.float64)
        self._P = problem.transition
        self._cdf = np.cumsum(self._P, axis=1)
        self._r_bar = problem.expected_reward
        self._jacobian = problem.Phi - problem.gamma * self._P @ problem.Phi
        super().__init__(sigma_h_sq=0.0 if problem.deterministic_mode else self._variance_at_zero())

    def _variance_at_zero(self) -> float:
        second = np.sum(self._P * self.problem.R ** 2, axis=1)
        return float(np.sum(second - self._r_bar ** 2))

    @property
    def outer_shape(self):
        return (self.problem.Phi.shape[1],)

    @property
    def map_shape(self):
        return (self.problem.n_states,)

    def next_states(self, stream: RngStream) -> np.ndarray:
        u = stream.random(self.problem.n_states)
        index = np.sum(self._cdf < u[:, None], axis=1)
        return np.minimum(index, self.problem.n_states - 1)

    def _sample_h(self, w, rng: SampleStreams):
        if self.problem.deterministic_mode:
            return self.exact_h(w)
        p = self.problem
        nxt = self.next_states(rng.xi)
        states = np.arange(p.n_states)
        return p.Phi @ w - (p.R[states, nxt] + p.gamma * (p.Phi[nxt] @ w))

    def _vjp_h(self, w, u, rng: SampleStreams):
        if self.problem.deterministic_mode:
            return self._jacobian.T @ u
        p = self.problem
        nxt = self.next_states(rng.xi)
        return p.Phi.T @ u - p.gamma * (p.Phi[nxt].T @ u)

    def _grad_f(self, y, rng):
        return 2.0 * y

    def exact_h(self, w):
        return self._jacobian @ w - self._r_bar

    def exact_jacobian(self, w):
        return self._jacobian

    def exact_grad_f(self, y):
        return 2.0 * y

    def objective(self, w, y=None):
        return float(np.sum(self.exact_h(w) ** 2))

    def exact_gradient(self, w):
        return 2.0 * self._jacobian.T @ self.exact_h(w)

    def error_metric(self, w) -> Optional[float]:
        """||w - w*|| / ||w*|| when a reference solution is attached."""
        if self.w_star is None:
            return None
        scale = float(np.linalg.norm(self.w_star))
        distance = float(np.linalg.norm(w - self.w_star))
        return distance / scale if scale > 0 else distance


def policy_eval_oracle(problem: PolicyEvalProblem, w_star: Optional[Point] = None) -> PolicyEvaluationOracle:
    return PolicyEvaluationOracle(problem, w_star)


def reference_w_star(problem: PolicyEvalProblem, budget: int = 100_000) -> Point:
    """
    Reference solution from a long deterministic compositional Frank-Wolfe run.

    Args:
        problem (PolicyEvalProblem): Problem; its deterministic_mode flag is ignored
        budget (int): Iterations

    Returns:
        Point: The final iterate
    """
    exact = replace(problem, deterministic_mode=True)
    config = SolverConfig(algorithm=Algorithm.SCFW, regime="convex", horizon_T=budget,
                          seed=0, record_every=budget)
    logger.info("computing reference solution with %d deterministic iterations", budget)
    result = run_scfw(PolicyEvaluationOracle(exact), exact.constraint(), config)
    return result.point
