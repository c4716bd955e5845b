import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from core import NumericError, SampleStreams, UsageError
from oracles import hypergradient_sample
from problems import BilevelQuadratic
from trackers import (
    TrackerState,
    bilevel_track,
    compositional_gradient_sample,
    compositional_track_d,
    compositional_track_y,
    inner_sgd_step,
)

from .toy_oracles import NoisyIdentityMap, ScalarBilevel


class TestInnerSgdStep:

    def test_deterministic_step(self, streams):
        oracle = ScalarBilevel(mu=1.0, cross=1.0)
        state = TrackerState.initial(np.zeros(1), np.array([2.0]), np.zeros(1))
        inner_sgd_step(oracle, state, np.array([1.0]), 0.5, streams)
        # grad = mu y + cross x = 3
        assert_allclose(state.y, [0.5])
        assert_allclose(state.prev_y, [2.0])
        assert oracle.counter.inner == 1

    def test_rejects_step_outside_unit_interval(self, streams):
        state = TrackerState.initial(np.zeros(1), np.zeros(1), np.zeros(1))
        with pytest.raises(UsageError):
            inner_sgd_step(ScalarBilevel(), state, np.zeros(1), 0.0, streams)
        with pytest.raises(UsageError):
            inner_sgd_step(ScalarBilevel(), state, np.zeros(1), 1.5, streams)

    def test_non_finite_gradient(self, streams):
        state = TrackerState.initial(np.zeros(1), np.array([np.inf]), np.zeros(1))
        with pytest.raises(NumericError):
            inner_sgd_step(ScalarBilevel(), state, np.zeros(1), 0.5, streams, iteration=4)


class TestBilevelTrack:

    def test_equal_points_reuse_one_sample(self):
        oracle = ScalarBilevel()
        rng = SampleStreams(1)
        state = TrackerState.initial(np.array([5.0]), np.zeros(1), np.zeros(1))
        bilevel_track(oracle, state, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), 0.5, 2, rng)
        assert oracle.counter.outer == 2
        # (1 - rho)(d - h) + h with the same h
        reference = hypergradient_sample(ScalarBilevel(), np.zeros(1), np.zeros(1), 2, SampleStreams(1))
        assert_allclose(state.d, 0.5 * (5.0 - reference) + reference)

    def test_two_points_share_the_sample(self):
        oracle = BilevelQuadratic(a=np.ones(2), p=1.0, q=0.0, sigma_f=1.0, sigma_g=1.0)
        rng = SampleStreams(6)
        x_prev, x_t = np.zeros(2), np.array([0.5, -0.5])
        y_prev, y_t = np.zeros(2), np.array([0.1, 0.2])
        state = TrackerState.initial(np.zeros(2), y_t, x_prev)
        bilevel_track(oracle, state, x_t, x_prev, y_t, y_prev, 1.0, 1, rng)
        assert oracle.counter.outer == 4
        # rho = 1 keeps only h(x_t, y_t) under the same draws as a fresh evaluation
        fresh = hypergradient_sample(oracle, x_t, y_t, 1, SampleStreams(6))
        assert_allclose(state.d, fresh)

    def test_noise_cancels_in_the_correction(self):
        oracle = BilevelQuadratic(a=np.ones(2), p=1.0, q=1.0, sigma_f=1.0)
        rng = SampleStreams(9)
        x = np.zeros(2)
        y_prev, y_t = np.zeros(2), np.array([0.3, 0.0])
        state = TrackerState.initial(np.zeros(2), y_t, x)
        bilevel_track(oracle, state, x, x, y_t, y_prev, 0.5, 1, rng)
        # noise enters h additively, so h(x, y_t) - h(x, y_prev) is exact: q (y_t - y_prev)
        previous = hypergradient_sample(oracle, x, y_prev, 1, SampleStreams(9))
        assert_allclose(state.d - 0.5 * (0.0 - previous) - previous, [0.3, 0.0], atol=1e-12)

    def test_rejects_bad_weight(self, streams):
        state = TrackerState.initial(np.zeros(1), np.zeros(1), np.zeros(1))
        with pytest.raises(UsageError):
            bilevel_track(ScalarBilevel(), state, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1),
                          0.0, 1, streams)


class TestCompositionalTrackers:

    def test_track_y_equal_points(self):
        oracle = NoisyIdentityMap(dim=2)
        rng = SampleStreams(2)
        x = np.array([1.0, -1.0])
        state = TrackerState.initial(np.zeros(2), np.array([4.0, 4.0]), x)
        compositional_track_y(oracle, state, x, x, 0.25, rng)
        sample = x + SampleStreams(2).xi.standard_normal(2)
        assert_allclose(state.y, 0.75 * (np.array([4.0, 4.0]) - sample) + sample)
        assert oracle.counter.map == 1

    def test_track_y_shares_xi(self):
        oracle = NoisyIdentityMap(dim=3)
        rng = SampleStreams(3)
        x_prev, x_t = np.zeros(3), np.ones(3)
        y0 = np.full(3, 2.0)
        state = TrackerState.initial(np.zeros(3), y0, x_prev)
        compositional_track_y(oracle, state, x_t, x_prev, 0.5, rng)
        # identical noise in both samples: y = 0.5 (y0 - x_prev - xi) + x_t + xi
        xi = SampleStreams(3).xi.standard_normal(3)
        assert_allclose(state.y, 0.5 * (y0 - xi) + x_t + xi)
        assert_array_equal(state.prev_y, y0)
        assert oracle.counter.map == 2

    def test_track_y_contracts_the_variance(self):
        oracle = NoisyIdentityMap(dim=3)
        rng = SampleStreams(0)
        x = np.array([0.5, -0.5, 1.0])
        state = TrackerState.initial(np.zeros(3), x.copy(), x)
        errors = []
        for step in range(20_000):
            y = compositional_track_y(oracle, state, x, x, 0.1, rng)
            if step >= 200:
                errors.append(y - x)
        # single samples have unit variance per coordinate
        assert np.var(errors) == pytest.approx(0.1 / 1.9, rel=0.15)

    def test_gradient_sample(self):
        oracle = NoisyIdentityMap(dim=2)
        y = np.array([0.5, 1.5])
        assert_allclose(compositional_gradient_sample(oracle, np.zeros(2), y, SampleStreams(0)), y)
        assert oracle.counter.outer == 1
        assert oracle.counter.map == 1

    def test_track_d(self):
        oracle = NoisyIdentityMap(dim=2)
        state = TrackerState.initial(np.array([1.0, 1.0]), np.zeros(2), np.zeros(2))
        y_prev, y_t = np.array([1.0, 0.0]), np.array([0.0, 2.0])
        compositional_track_d(oracle, state, np.ones(2), np.zeros(2), y_t, y_prev, 0.5, SampleStreams(0))
        # grad C sample is y itself: d = 0.5 (d - y_prev) + y_t
        assert_allclose(state.d, [0.0, 2.5])
        assert oracle.counter.outer == 2

    def test_non_finite_estimate(self, streams):
        oracle = NoisyIdentityMap(dim=1)
        state = TrackerState.initial(np.array([np.nan]), np.zeros(1), np.zeros(1))
        with pytest.raises(NumericError):
            compositional_track_d(oracle, state, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1),
                                  0.5, streams)


class TestTrackerState:

    def test_initial_copies(self):
        d = np.zeros(2)
        state = TrackerState.initial(d, np.ones(2), np.ones(2))
        d[0] = 7.0
        assert state.d[0] == 0.0
        assert state.is_finite()
        state.y = np.array([np.nan, 0.0])
        assert not state.is_finite()
