import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from claimpi.errors import DataError, InfeasibleRanksError, NonnegativityError
from claimpi.intervals import (
    RegressionSample,
    _bound_without_response_floor,
    constrained_interval,
    general_interval,
    point_predict,
    residualize,
    unsupervised_claim_interval,
)
from claimpi.order_statistics import two_sided_ranks, upper_rank
from claimpi.simulation import example_config, run_experiment
from claimpi.transform import evaluate, parse

H1 = parse("t1", 1)
ZERO = parse("0", 1)
TOY = RegressionSample(np.array([0.5, 1, 2, 5]), np.array([1, 2, 3, 10]))


class TestResidualize:
    def test_hand(self):
        assert residualize(TOY, H1).tolist() == [0.5, 1, 1, 5]

    def test_zero_transform(self):
        assert residualize(TOY, ZERO).tolist() == [1, 2, 3, 10]

    def test_perfect_fit(self):
        x = np.array([0.3, 1.7, 4.0])
        assert residualize(RegressionSample(x, x), H1).tolist() == [0, 0, 0]


class TestConstrained:
    def test_positive_branch(self):
        interval = constrained_interval(TOY, H1, [3], 0.2)
        assert (interval.lower, interval.upper, interval.branch) == (0, 8, "positive")
        assert not interval.lower_open

    def test_fallback_branch(self):
        sample = RegressionSample(np.array([5.0, 6.0]), np.array([0.1, 0.2]))
        interval = constrained_interval(sample, H1, [2], 0.2)
        assert interval.branch == "fallback"
        assert interval.upper == 0.2

    def test_fallback_picks_h_when_smaller(self):
        sample = RegressionSample(np.array([5.0, 6.0]), np.array([0.1, 0.2]))
        interval = constrained_interval(sample, H1, [0.05], 0.2)
        assert interval.branch == "fallback" and interval.upper == 0.05

    def test_zero_transform_is_baseline(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            y = rng.gamma(2, 1, 37)
            x = rng.gamma(2, 1, 37)
            a = constrained_interval(RegressionSample(x, y), ZERO, [1.0], 0.1)
            b = unsupervised_claim_interval(y, 0.1)
            assert (a.lower, a.upper, a.upper_open) == (b.lower, b.upper, b.upper_open)
            assert a.upper == np.sort(y)[upper_rank(37, 0.1) - 1]

    def test_not_tightened_by_response_bound(self):
        # W_(r) + h(x) far exceeds Y_(r); the bound must stay W_(r) + h(x)
        interval = constrained_interval(TOY, H1, [100], 0.2)
        assert interval.upper == 105

    def test_degenerate_when_h_vanishes(self):
        sample = RegressionSample(np.array([5.0, 6.0]), np.array([0.1, 0.2]))
        interval = constrained_interval(sample, H1, [0.0], 0.2)
        assert interval.upper == 0 and interval.degenerate
        assert interval.contains(0.0)

    def test_negative_h_rejected(self):
        with pytest.raises(NonnegativityError):
            constrained_interval(TOY, parse("t1-1", 1), [3], 0.2)
        with pytest.raises(NonnegativityError):
            constrained_interval(TOY, parse("t1", 1), [-3], 0.2)

    def test_negative_response_rejected(self):
        with pytest.raises(DataError):
            constrained_interval(RegressionSample(np.array([1.0, 2.0]), np.array([1.0, -1.0])), H1, [1], 0.2)

    def test_stepping_stone_form(self):
        assert _bound_without_response_floor(-5.0, 2.0) == 2.0
        assert _bound_without_response_floor(1.0, 2.0) == 3.0

    @settings(max_examples=200)
    @given(
        st.lists(st.tuples(st.floats(0, 50), st.floats(0, 50)), min_size=1, max_size=30),
        st.floats(0, 50),
        st.sampled_from([0.05, 0.1, 0.2, 0.5]),
    )
    def test_upper_positive_unless_documented_degeneracy(self, pairs, x_new, alpha):
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        interval = constrained_interval(RegressionSample(x, y), H1, [x_new], alpha)
        if interval.upper <= 0:
            assert interval.branch == "fallback"
            assert np.sort(y)[upper_rank(y.size, alpha) - 1] == 0 or x_new == 0

    @pytest.mark.slow
    def test_monte_carlo_validity_example1(self):
        report = run_experiment(example_config(1).replace(reps=3000, master_seed=991))
        sigma = math.sqrt(0.1 * 0.9 / 3000)
        for m in report.methods:
            assert m.coverage >= 0.9 - 3 * sigma, m


class TestGeneral:
    def test_zero_transform_reduces_to_unsupervised(self):
        y = np.arange(1.0, 21.0)
        x = np.random.default_rng(0).normal(size=20)
        interval = general_interval(RegressionSample(x, y), ZERO, [0.3], 0.2)
        ranks = two_sided_ranks(20, 0.2)
        assert (interval.lower, interval.upper) == (y[ranks.l - 1], y[ranks.r - 1])

    @settings(max_examples=100)
    @given(
        st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=20, max_size=40),
        st.floats(-100, 100),
        st.floats(-1000, 1000),
    )
    def test_invariant_to_constant_shift(self, pairs, x_new, c):
        sample = RegressionSample(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))
        base = general_interval(sample, parse("t1^2/10 + t1", 1), [x_new], 0.1)
        shifted = general_interval(sample, parse(f"t1^2/10 + t1 + {c!r}", 1) if c >= 0 else parse(f"t1^2/10 + t1 - {-c!r}", 1), [x_new], 0.1)
        assert shifted.lower == pytest.approx(base.lower, abs=1e-10 * max(1, abs(c)))
        assert shifted.upper == pytest.approx(base.upper, abs=1e-10 * max(1, abs(c)))

    def test_infeasible(self):
        with pytest.raises(InfeasibleRanksError):
            general_interval(TOY, H1, [1], 0.1)

    @settings(max_examples=200)
    @given(
        st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0, 10),
    )
    def test_membership_equivalence(self, lower, upper, y_next, x_next):
        lower, upper = min(lower, upper), max(lower, upper)
        h = parse("log(1+t1) + t1^2", 1)
        hx = evaluate(h, [x_next])
        w_next = y_next - hx
        in_w = lower < w_next < upper
        in_y = lower + hx < y_next < upper + hx
        # equal up to rounding at the boundaries
        if min(abs(w_next - lower), abs(w_next - upper)) > 1e-9 * (1 + abs(hx) + abs(y_next)):
            assert in_w == in_y


class TestUnsupervised:
    def test_ordered(self):
        interval = unsupervised_claim_interval(np.arange(1.0, 51.0), 0.1)
        assert interval.upper == 46

    def test_rank_1207(self):
        y = np.random.default_rng(1).permutation(np.arange(1340.0))
        assert unsupervised_claim_interval(y, 0.1).upper == 1206.0

    def test_singleton(self):
        assert unsupervised_claim_interval([3.3], 0.5).upper == 3.3


class TestPointPredict:
    def test_zero_w_hat(self):
        assert point_predict(TOY, parse("t1^2", 1), [3], w_hat=0.0) == 9

    def test_residual_mean(self):
        assert point_predict(TOY, H1, [3]) == pytest.approx(4.875, abs=0)

    def test_reduces_to_response_mean(self):
        assert point_predict(TOY, ZERO, [3], w_hat=TOY.responses.mean()) == 4.0

    def test_callable_producer(self):
        assert point_predict(TOY, H1, [3], w_hat=np.median) == 4.0
