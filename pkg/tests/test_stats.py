import math
import random

import pytest
from hypothesis import given, strategies as st

from medreview.stats import (
    InsufficientData,
    NonPositiveTime,
    OutOfRange,
    WrongLength,
    ZeroVariance,
    log_times,
    regularized_incomplete_beta,
    student_t_two_sided_p,
    sus_score,
    welch_t_test,
)


class TestIncompleteBeta:
    def test_endpoints(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_symmetric_half(self):
        # I_(1/2)(a, a) = 1/2 for any a
        for a in (0.5, 1.0, 2.0, 7.5):
            assert regularized_incomplete_beta(a, a, 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_uniform_case(self):
        # I_x(1, 1) = x
        for x in (0.1, 0.25, 0.7, 0.99):
            assert regularized_incomplete_beta(1.0, 1.0, x) == pytest.approx(x, abs=1e-12)

    def test_closed_form_a1(self):
        # I_x(1, b) = 1 - (1-x)^b
        for b in (1.5, 3.0, 10.0):
            for x in (0.05, 0.4, 0.9):
                expected = 1 - (1 - x) ** b
                assert regularized_incomplete_beta(1.0, b, x) == pytest.approx(expected, abs=1e-12)


class TestWelch:
    def test_identical_samples(self):
        result = welch_t_test([1, 2, 3], [1, 2, 3])
        assert result.t == 0.0
        assert result.p == 1.0

    def test_antisymmetry(self):
        a, b = [1.0, 2.0, 4.0], [2.0, 5.0, 9.0, 3.0]
        fwd = welch_t_test(a, b)
        rev = welch_t_test(b, a)
        assert fwd.t == pytest.approx(-rev.t, abs=1e-15)
        assert fwd.p == pytest.approx(rev.p, abs=1e-15)
        assert fwd.df == pytest.approx(rev.df, abs=1e-12)

    def test_textbook_pair(self):
        # hand-derivable: equal variances 2.5, n=5 -> t=-1, df=8
        result = welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert result.t == pytest.approx(-1.0, abs=1e-12)
        assert result.df == pytest.approx(8.0, abs=1e-12)

    def test_against_frozen_oracle(self, welch_oracle_cases):
        assert len(welch_oracle_cases) >= 20
        for case in welch_oracle_cases:
            result = welch_t_test(case["a"], case["b"])
            assert abs(result.p - case["p"]) <= 1e-9
            assert abs(result.t - case["t"]) <= 1e-9
            assert abs(result.df - case["df"]) <= 1e-9

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            welch_t_test([1.0], [1.0, 2.0])

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            welch_t_test([2.0, 2.0, 2.0], [1.0, 2.0])

    def test_scale_invariance(self):
        rng = random.Random(3)
        a = [rng.gauss(0, 1) for _ in range(8)]
        b = [rng.gauss(1, 2) for _ in range(6)]
        base = welch_t_test(a, b)
        scaled = welch_t_test([x * 7.5 for x in a], [x * 7.5 for x in b])
        assert scaled.t == pytest.approx(base.t, rel=1e-12)
        assert scaled.p == pytest.approx(base.p, rel=1e-9)

    def test_p_in_unit_interval(self):
        rng = random.Random(11)
        for _ in range(50):
            a = [rng.gauss(0, 1) for _ in range(rng.randint(2, 12))]
            b = [rng.gauss(rng.uniform(-3, 3), 1.5) for _ in range(rng.randint(2, 12))]
            result = welch_t_test(a, b)
            assert 0.0 < result.p <= 1.0


class TestSus:
    def test_best_case(self):
        assert sus_score([5, 1, 5, 1, 5, 1, 5, 1, 5, 1]) == 100.0

    def test_worst_case(self):
        assert sus_score([1, 5, 1, 5, 1, 5, 1, 5, 1, 5]) == 0.0

    def test_midpoint(self):
        assert sus_score([3] * 10) == 50.0

    def test_wrong_length(self):
        with pytest.raises(WrongLength):
            sus_score([3] * 9)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            sus_score([3] * 9 + [6])

    @given(
        st.lists(st.integers(1, 5), min_size=10, max_size=10),
        st.integers(0, 9),
    )
    def test_monotonicity(self, answers, index):
        base = sus_score(answers)
        bumped = list(answers)
        if bumped[index] < 5:
            bumped[index] += 1
            moved = sus_score(bumped)
            if index % 2 == 0:  # odd-numbered item: higher answer is better
                assert moved >= base
            else:
                assert moved <= base


class TestLogTimes:
    def test_e_and_one(self):
        assert log_times([math.e, 1.0]) == pytest.approx([1.0, 0.0])

    def test_monotone(self):
        values = [3.0, 10.0, 200.0, 4000.0]
        logged = log_times(values)
        assert logged == sorted(logged)

    def test_non_positive_rejected(self):
        with pytest.raises(NonPositiveTime):
            log_times([60.0, 0.0])


def test_student_t_p_matches_beta_identity():
    # p(|T| >= t) must equal I_{df/(df+t^2)}(df/2, 1/2)
    for t, df in [(1.0, 8.0), (2.5, 3.0), (0.3, 40.0)]:
        x = df / (df + t * t)
        assert student_t_two_sided_p(t, df) == pytest.approx(
            regularized_incomplete_beta(df / 2, 0.5, x), abs=1e-15
        )
