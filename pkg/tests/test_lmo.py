import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import linalg

from core import NumericError, RngStream, StreamId, UsageError, box, l1_ball, nuclear_norm_ball, simplex
from lmo import fw_gap, lmo, top_singular_pair
from solvers import l1_ball_projection, nuclear_ball_projection, project, simplex_projection


def _l1_vertices(dim, radius):
    eye = np.eye(dim)
    return [sign * radius * eye[i] for i in range(dim) for sign in (1.0, -1.0)]


def _box_vertices(lo, hi):
    return [np.array(corner) for corner in itertools.product(*zip(lo, hi))]


class TestClosedFormAgainstEnumeration:

    @pytest.mark.parametrize("dim", [1, 2, 3, 4, 5, 6])
    def test_l1_simplex_box(self, dim, np_rng):
        lo = -np_rng.random(dim)
        hi = np_rng.random(dim) + 0.1
        sets = [
            (l1_ball(dim, 1.7), _l1_vertices(dim, 1.7)),
            (box(lo, hi), _box_vertices(lo, hi)),
        ]
        if dim >= 2:
            sets.append((simplex(dim, 2.0), [2.0 * row for row in np.eye(dim)]))
        for _ in range(1000 // 6 + 1):
            d = np_rng.standard_normal(dim)
            for constraint, vertices in sets:
                best = min(float(v @ d) for v in vertices)
                result = lmo(constraint, d)
                assert result.inner_product == pytest.approx(best, abs=1e-12)
                assert constraint.contains(result.vertex)


class TestNuclearOracle:

    def test_matches_full_svd(self, np_rng):
        constraint = nuclear_norm_ball((10, 8), 2.5)
        stream = RngStream(0, StreamId.LMO)
        for _ in range(100):
            d = np_rng.standard_normal((10, 8))
            expected = -2.5 * linalg.svdvals(d)[0]
            result = lmo(constraint, d, stream)
            assert abs(result.inner_product - expected) <= 1e-6 * abs(expected)
            assert result.iterations_used >= 1

    def test_vertex_is_rank_one_and_feasible(self, np_rng):
        constraint = nuclear_norm_ball((6, 4), 1.0)
        vertex = lmo(constraint, np_rng.standard_normal((6, 4)), RngStream(1, StreamId.LMO)).vertex
        singular = linalg.svdvals(vertex)
        assert singular[0] == pytest.approx(1.0)
        assert_allclose(singular[1:], 0.0, atol=1e-12)

    def test_zero_matrix_has_no_singular_pair(self):
        assert top_singular_pair(np.zeros((3, 3))) is None


class TestOracleEdgeCases:

    def test_zero_direction_gives_canonical_vertex(self):
        for constraint in (l1_ball(3), simplex(3), nuclear_norm_ball((2, 3)), box(-1.0, 1.0, shape=(3,))):
            zero = np.zeros(constraint.shape)
            assert_array_equal(lmo(constraint, zero).vertex, constraint.canonical_vertex())

    def test_ties_go_to_lowest_index(self):
        assert_array_equal(lmo(l1_ball(3, 1.0), np.array([1.0, -1.0, 0.0])).vertex, [-1.0, 0.0, 0.0])
        assert_array_equal(lmo(simplex(3, 1.0), np.array([0.0, 0.0, 1.0])).vertex, [1.0, 0.0, 0.0])

    def test_matrix_direction_on_l1_ball(self):
        d = np.array([[0.0, 2.0], [-3.0, 1.0]])
        assert_array_equal(lmo(l1_ball((2, 2), 1.0), d).vertex, [[0.0, 0.0], [1.0, 0.0]])

    def test_shape_mismatch(self):
        with pytest.raises(UsageError):
            lmo(l1_ball(3), np.ones(4))

    def test_non_finite_direction(self):
        with pytest.raises(NumericError):
            lmo(l1_ball(2), np.array([np.nan, 1.0]))


class TestFrankWolfeGap:

    def test_nonnegative_for_feasible_points(self, np_rng):
        constraint = l1_ball(5, 1.0)
        for _ in range(50):
            x = l1_ball_projection(np_rng.standard_normal(5), 1.0)
            assert fw_gap(constraint, x, np_rng.standard_normal(5)) >= -1e-12

    def test_zero_at_linear_minimizer(self):
        constraint = simplex(3, 1.0)
        grad = np.array([3.0, 1.0, 2.0])
        assert fw_gap(constraint, np.array([0.0, 1.0, 0.0]), grad) == pytest.approx(0.0)

    def test_value(self):
        assert fw_gap(l1_ball(2, 1.0), np.zeros(2), np.array([1.0, -2.0])) == pytest.approx(2.0)

    def test_infeasible_point(self):
        with pytest.raises(UsageError):
            fw_gap(l1_ball(2, 1.0), np.array([2.0, 0.0]), np.ones(2))

    def test_nuclear_gap_with_start_stream(self, np_rng):
        grad = np_rng.standard_normal((6, 4))
        constraint = nuclear_norm_ball((6, 4), 2.0)
        x = np.zeros((6, 4))
        expected = 2.0 * linalg.svdvals(grad)[0]
        assert fw_gap(constraint, x, grad, RngStream(1, StreamId.LMO)) == pytest.approx(expected, rel=1e-6)
        assert fw_gap(constraint, x, grad) == pytest.approx(expected, rel=1e-6)


class TestProjections:

    def test_simplex_projection(self, np_rng):
        for _ in range(20):
            p = simplex_projection(np_rng.standard_normal(6) * 3.0, 2.0)
            assert p.sum() == pytest.approx(2.0)
            assert np.all(p >= 0.0)

    def test_simplex_projection_known_value(self):
        assert_allclose(simplex_projection(np.array([1.0, 0.0]), 1.0), [1.0, 0.0])
        assert_allclose(simplex_projection(np.array([0.5, 0.5, 2.0]), 1.0), [0.0, 0.0, 1.0])

    def test_l1_projection_keeps_interior_points(self):
        v = np.array([0.2, -0.3])
        assert_array_equal(l1_ball_projection(v, 1.0), v)
        assert np.sum(np.abs(l1_ball_projection(np.array([3.0, -1.0]), 1.0))) == pytest.approx(1.0)

    def test_nuclear_projection_is_feasible(self, np_rng):
        for n in (4, 16):
            x = np_rng.standard_normal((n, n)) * 5.0
            projected = nuclear_ball_projection(x, 1.5)
            assert np.sum(linalg.svdvals(projected)) <= 1.5 + 1e-6

    def test_project_dispatches_box_to_clipping(self):
        constraint = box(0.0, 1.0, shape=(3,))
        assert_array_equal(project(constraint, np.array([-1.0, 0.5, 2.0])), [0.0, 0.5, 1.0])

    def test_projection_is_closest_among_vertices(self, np_rng):
        constraint = l1_ball(4, 1.0)
        v = np_rng.standard_normal(4) * 4.0
        p = project(constraint, v)
        for vertex in _l1_vertices(4, 1.0):
            assert np.linalg.norm(v - p) <= np.linalg.norm(v - vertex) + 1e-12
