import numpy as np
import pytest
from numpy.testing import assert_allclose

from core import ConfigurationError, MetricError, RngStream, SampleStreams, l1_ball
from ingest import sample_positions
from problems import (
    BilevelQuadratic,
    CompositionalQuadratic,
    MatrixCompletionLeastSquares,
    MatrixCompletionOracle,
    MatrixCompletionProblem,
    NonconvexCompositionalToy,
    PolicyEvalProblem,
    PolicyEvaluationOracle,
    SyntheticKind,
    SyntheticSpec,
    matcomp_bilevel_oracle,
    matcomp_synthetic,
    normalized_error,
    policy_eval_oracle,
    policy_eval_problem,
    reference_w_star,
)
from solvers import Algorithm, SolverConfig, run_scfw


def numeric_gradient(func, x, step=1e-6):
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        bump = np.zeros_like(x)
        bump[index] = step
        grad[index] = (func(x + bump) - func(x - bump)) / (2.0 * step)
    return grad


def one_state_problem(deterministic_mode=True):
    return PolicyEvalProblem(P=np.ones((1, 1, 1)), policy=np.ones((1, 1)), R=np.ones((1, 1)),
                             gamma=0.5, Phi=np.ones((1, 1)), alpha=10.0,
                             deterministic_mode=deterministic_mode)


def observed_weights(problem):
    weights = np.zeros(problem.shape)
    np.add.at(weights, problem.omega1, 1.0)
    return weights


def small_matcomp(lambda1=0.1, smoothing="pseudo_huber", n=4):
    rng = np.random.default_rng(3)
    mask = rng.random((n, n)) < 0.7
    M = np.where(mask, rng.standard_normal((n, n)), 0.0)
    rows, cols = np.nonzero(mask)
    return MatrixCompletionProblem(M=M, omega1=(rows, cols), omega2=(rows, cols), lambda1=lambda1,
                                   lambda2=0.5, alpha=5.0, b1=3, b2=3, epsilon_l1=0.5,
                                   smoothing=smoothing)


class TestNormalizedError:

    def test_value(self):
        reference = np.array([[1.0, 2.0], [0.0, 3.0]])
        x = np.array([[1.0, 0.0], [5.0, 3.0]])
        omega = (np.array([0, 0, 1]), np.array([0, 1, 1]))
        assert normalized_error(x, reference, omega) == pytest.approx(4.0 / 14.0)

    def test_only_observed_entries_count(self):
        reference = np.eye(2)
        omega = (np.array([0]), np.array([0]))
        assert normalized_error(np.array([[1.0, 9.0], [9.0, 9.0]]), reference, omega) == 0.0

    def test_undefined_cases(self):
        with pytest.raises(MetricError):
            normalized_error(np.eye(2), np.eye(2), (np.array([], dtype=int), np.array([], dtype=int)))
        with pytest.raises(MetricError):
            normalized_error(np.eye(2), np.zeros((2, 2)), (np.array([0]), np.array([0])))


class TestMatrixCompletion:

    def test_synthetic_instance(self):
        problem, truth = matcomp_synthetic(12, 3, 0.3, 0.6, RngStream(0, "problem"))
        assert np.linalg.matrix_rank(truth) == 3
        assert_allclose(truth, truth.T)
        assert problem.alpha == pytest.approx(np.sum(np.linalg.svd(truth, compute_uv=False)))
        observed = np.zeros((12, 12), dtype=bool)
        observed[problem.omega1] = True
        assert np.all(problem.M[~observed] == 0.0)
        assert problem.reference() is problem.truth

    def test_same_seed_same_instance(self):
        a, _ = matcomp_synthetic(8, 2, 0.5, 0.5, RngStream(4, "problem"))
        b, _ = matcomp_synthetic(8, 2, 0.5, 0.5, RngStream(4, "problem"))
        assert_allclose(a.M, b.M)

    @pytest.mark.parametrize("args", [(3, 4, 0.1, 0.5), (5, 2, 1.0, 0.5), (5, 2, 0.1, 0.0)])
    def test_rejects_bad_parameters(self, args):
        with pytest.raises(ConfigurationError):
            matcomp_synthetic(*args, rng=RngStream(0, "problem"))

    def test_rejects_zero_coupling(self):
        with pytest.raises(ConfigurationError):
            MatrixCompletionProblem(M=np.eye(2), omega1=(np.array([0]), np.array([0])),
                                    omega2=(np.array([0]), np.array([0])), lambda2=0.0)

    def test_inner_optimum_is_stationary(self):
        problem = small_matcomp()
        oracle = MatrixCompletionOracle(problem)
        x = np.random.default_rng(0).standard_normal(problem.shape)
        y = oracle.inner_optimum(x)
        w = observed_weights(problem)
        slope = (2.0 * w * (y - problem.M) + problem.lambda1 * y / np.sqrt(y ** 2 + 0.25)
                 + 2.0 * problem.lambda2 * (y - x))
        assert_allclose(slope, 0.0, atol=1e-9)

    def test_inner_optimum_without_sparse_term(self):
        problem = small_matcomp(lambda1=0.0)
        oracle = MatrixCompletionOracle(problem)
        x = np.ones(problem.shape)
        w = observed_weights(problem)
        assert_allclose(oracle.inner_optimum(x), (w * problem.M + 0.5 * x) / (w + 0.5))

    def test_exact_gradient_matches_finite_differences(self):
        oracle = MatrixCompletionOracle(small_matcomp())
        x = np.random.default_rng(1).standard_normal(oracle.outer_shape)
        assert_allclose(oracle.exact_gradient(x), numeric_gradient(oracle.objective, x), atol=1e-6)

    def test_factory_builds_the_bilevel_oracle(self):
        problem = small_matcomp()
        oracle = matcomp_bilevel_oracle(problem)
        assert isinstance(oracle, MatrixCompletionOracle)
        assert oracle.mu_g == pytest.approx(1.0)
        observed = len(problem.omega2[0])
        assert oracle.L_g == pytest.approx(2.0 * observed / 3 + 0.1 / 0.5 + 1.0)

    def test_subgradient_mode_has_no_exact_gradient(self):
        oracle = MatrixCompletionOracle(small_matcomp(smoothing="subgradient"))
        assert oracle.exact_gradient(np.zeros(oracle.outer_shape)) is None

    def test_outer_gradient_is_unbiased(self):
        problem = small_matcomp(n=3)
        oracle = MatrixCompletionOracle(problem)
        x = np.arange(9.0).reshape(3, 3) / 9.0
        y = np.zeros((3, 3))
        rng = SampleStreams(0)
        mean = np.mean([oracle.grad_x_f(x, y, rng) for _ in range(20_000)], axis=0)
        assert_allclose(mean, 2.0 * observed_weights(problem) * (x - y), atol=0.08)
        assert oracle.counter.outer == 20_000

    def test_sampled_inner_gradient_matches_finite_differences(self):
        problem = small_matcomp()
        oracle = MatrixCompletionOracle(problem)
        gen = np.random.default_rng(4)
        x, y = gen.standard_normal(problem.shape), gen.standard_normal(problem.shape)
        positions = sample_positions(len(problem.omega2[0]), problem.b2, SampleStreams(7).xi)
        rows, cols = problem.omega2[0][positions], problem.omega2[1][positions]
        scale = len(problem.omega2[0]) / problem.b2

        def sampled_inner(z):
            eps = problem.epsilon_l1
            return (scale * np.sum((z[rows, cols] - problem.M[rows, cols]) ** 2)
                    + problem.lambda1 * np.sum(np.sqrt(z ** 2 + eps ** 2) - eps)
                    + problem.lambda2 * np.sum((x - z) ** 2))

        assert_allclose(oracle.grad_y_g(x, y, SampleStreams(7)), numeric_gradient(sampled_inner, y),
                        atol=1e-5)

    def test_inner_hessian_products_match_finite_differences(self):
        problem = small_matcomp()
        oracle = MatrixCompletionOracle(problem)
        gen = np.random.default_rng(5)
        x, y, v = (gen.standard_normal(problem.shape) for _ in range(3))
        step = 1e-6

        def gradient(at_x, at_y):
            # the xi stream replays the batch the Hessian stream draws
            streams = SampleStreams(7)
            streams.xi = RngStream(7, "hessian")
            return oracle.grad_y_g(at_x, at_y, streams)

        along_y = (gradient(x, y + step * v) - gradient(x, y - step * v)) / (2.0 * step)
        assert_allclose(oracle.hvp_yy_g(x, y, v, SampleStreams(7)), along_y, atol=1e-5)
        along_x = (gradient(x + step * v, y) - gradient(x - step * v, y)) / (2.0 * step)
        assert_allclose(oracle.cross_hvp_xy_g(x, y, v, SampleStreams(7)), along_x, atol=1e-5)

    def test_least_squares_gradient(self):
        problem = small_matcomp()
        oracle = MatrixCompletionLeastSquares(problem)
        x = np.random.default_rng(2).standard_normal(problem.shape)
        assert_allclose(oracle.exact_gradient(x), numeric_gradient(oracle.objective, x), atol=1e-6)


class TestPolicyEvaluation:

    def test_random_instance_is_valid(self):
        problem = policy_eval_problem(n_states=6, n_actions=3, n_features=4, rng=RngStream(0, "problem"))
        assert_allclose(problem.transition.sum(axis=1), 1.0)
        assert_allclose(np.linalg.norm(problem.Phi, axis=1), 1.0)
        assert_allclose(problem.policy.max(axis=1), 0.9)
        assert np.all((problem.R >= 0) & (problem.R <= 1))

    @pytest.mark.parametrize("options", [{"gamma": 1.0}, {"n_states": 0}, {"favored_prob": 0.0}])
    def test_rejects_bad_parameters(self, options):
        with pytest.raises(ConfigurationError):
            policy_eval_problem(**options)

    def test_one_state_value(self):
        problem = one_state_problem()
        assert_allclose(problem.value_function(), [2.0])
        oracle = PolicyEvaluationOracle(problem)
        assert_allclose(oracle.exact_h(np.array([2.0])), [0.0])

    def test_one_state_solution(self):
        problem = one_state_problem()
        oracle = PolicyEvaluationOracle(problem)
        config = SolverConfig(algorithm=Algorithm.SCFW, horizon_T=2000, record_every=2000)
        result = run_scfw(oracle, problem.constraint(), config)
        assert result.point[0] == pytest.approx(2.0, abs=0.1)
        assert reference_w_star(problem, 2000)[0] == pytest.approx(2.0, abs=0.1)

    def test_next_state_frequencies(self):
        P = np.array([[[0.3, 0.7]], [[1.0, 0.0]]])
        problem = PolicyEvalProblem(P=P, policy=np.ones((2, 1)), R=np.zeros((2, 2)), gamma=0.9,
                                    Phi=np.eye(2))
        oracle = PolicyEvaluationOracle(problem)
        stream = RngStream(0, "xi")
        draws = np.array([oracle.next_states(stream) for _ in range(20_000)])
        assert np.mean(draws[:, 0] == 1) == pytest.approx(0.7, abs=0.02)
        assert np.all(draws[:, 1] == 0)

    def test_sampled_residual_is_unbiased(self):
        problem = policy_eval_problem(n_states=5, n_actions=2, n_features=3, rng=RngStream(1, "problem"))
        oracle = PolicyEvaluationOracle(problem)
        w = np.array([0.05, -0.02, 0.01])
        rng = SampleStreams(0)
        mean = np.mean([oracle.sample_h(w, rng) for _ in range(20_000)], axis=0)
        assert_allclose(mean, oracle.exact_h(w), atol=0.02)

    def test_exact_gradient_matches_finite_differences(self):
        problem = policy_eval_problem(n_states=5, n_actions=2, n_features=3, rng=RngStream(2, "problem"))
        oracle = PolicyEvaluationOracle(problem)
        w = np.array([0.3, -0.1, 0.2])
        assert_allclose(oracle.exact_gradient(w), numeric_gradient(oracle.objective, w), atol=1e-6)

    def test_map_pieces_match_finite_differences(self):
        problem = policy_eval_problem(n_states=5, n_actions=2, n_features=3, rng=RngStream(4, "problem"))
        oracle = PolicyEvaluationOracle(problem)
        w = np.array([0.02, -0.05, 0.03])
        jacobian = np.stack([numeric_gradient(lambda z, i=i: oracle.exact_h(z)[i], w) for i in range(5)])
        assert_allclose(oracle.exact_jacobian(w), jacobian, atol=1e-6)
        y = np.array([0.4, -0.2, 0.1, 0.0, 0.3])
        assert_allclose(oracle.exact_grad_f(y), numeric_gradient(lambda z: float(np.sum(z ** 2)), y),
                        atol=1e-6)

    def test_sampled_vjp_matches_finite_differences(self):
        problem = policy_eval_problem(n_states=5, n_actions=2, n_features=3, rng=RngStream(5, "problem"))
        oracle = PolicyEvaluationOracle(problem)
        w = np.array([0.02, -0.05, 0.03])
        u = np.array([1.0, -0.5, 0.25, 0.0, 2.0])

        def projected_sample(z):
            return float(u @ oracle.sample_h(z, SampleStreams(9)))

        assert_allclose(oracle.vjp_h(w, u, SampleStreams(9)), numeric_gradient(projected_sample, w), atol=1e-6)

    def test_factory_attaches_the_reference(self):
        oracle = policy_eval_oracle(one_state_problem(), w_star=np.array([2.0]))
        assert oracle.error_metric(np.array([2.0])) == 0.0
        assert oracle.sigma_h_sq == 0.0

    def test_error_metric_needs_reference(self):
        problem = one_state_problem()
        assert PolicyEvaluationOracle(problem).error_metric(np.array([1.0])) is None
        oracle = PolicyEvaluationOracle(problem, w_star=np.array([2.0]))
        assert oracle.error_metric(np.array([1.0])) == pytest.approx(0.5)

    def test_iterates_respect_the_radius(self):
        problem = policy_eval_problem(n_states=10, n_actions=3, n_features=10, alpha=0.1,
                                      rng=RngStream(3, "problem"))
        oracle = PolicyEvaluationOracle(problem)
        config = SolverConfig(algorithm=Algorithm.SCFW, horizon_T=200, record_every=50)
        result = run_scfw(oracle, problem.constraint(), config)
        assert problem.constraint().contains(result.point)
        assert all(r.fw_gap >= -1e-12 for r in result.records)


class TestTestbeds:

    def test_bilevel_quadratic_pieces(self):
        oracle = BilevelQuadratic(np.array([1.0, 2.0]), p=0.5, q=2.0, b=np.array([0.1, 0.2]),
                                  c=np.array([0.3, -0.4]))
        x = np.array([0.4, -0.2])
        assert_allclose(oracle.inner_optimum(x), x)
        assert_allclose(oracle.exact_gradient(x), numeric_gradient(oracle.objective, x), atol=1e-7)
        pieces = oracle.exact_pieces(x, oracle.inner_optimum(x))
        implicit = pieces.grad_x_F - pieces.hess_xy_G @ np.linalg.solve(pieces.hess_yy_G, pieces.grad_y_F)
        assert_allclose(implicit, oracle.exact_gradient(x))

    def test_bilevel_quadratic_optimum(self):
        oracle = BilevelQuadratic(np.ones(3), q=1.0, b=np.zeros(3), c=np.array([-0.2, 0.1, 0.0]))
        x_star, value = oracle.optimum(l1_ball(3, 1.0))
        assert_allclose(x_star, [0.2, -0.1, 0.0])
        assert value == pytest.approx(oracle.objective(x_star))

    def test_compositional_gradients(self):
        rng = np.random.default_rng(5)
        H = rng.standard_normal((4, 3))
        x = rng.standard_normal(3)
        quadratic = CompositionalQuadratic(H, rng.standard_normal(4))
        toy = NonconvexCompositionalToy(H, rng.standard_normal(4))
        for oracle in (quadratic, toy):
            assert_allclose(oracle.exact_gradient(x), numeric_gradient(oracle.objective, x), atol=1e-6)
            chain = oracle.exact_jacobian(x).T @ oracle.exact_grad_f(oracle.exact_h(x))
            assert_allclose(chain, oracle.exact_gradient(x))

    def test_spec_validation(self):
        with pytest.raises(ConfigurationError):
            SyntheticSpec(mu_g=2.0, L_g=1.0)
        with pytest.raises(ConfigurationError):
            SyntheticSpec(radius=0.0)

    def test_spec_builds_each_kind(self):
        for kind in SyntheticKind:
            oracle, constraint = SyntheticSpec(kind=kind, dim=4).build(RngStream(0, "problem"))
            assert tuple(oracle.outer_shape) == constraint.shape == (4,)
        oracle, constraint = SyntheticSpec(kind=SyntheticKind.COMPOSITIONAL_QUADRATIC, dim=4,
                                           radius=2.0).build(RngStream(0, "problem"))
        assert np.sum(np.abs(oracle.c)) == pytest.approx(1.0)
        x_star, value = oracle.optimum(constraint)
        assert value == pytest.approx(0.0)
