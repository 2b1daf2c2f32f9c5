"""
Unit tests for log-domain numerics.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st
from scipy import stats

from matching.errors import DomainError, EmptyLogSumError
from matching.services.numerics import (
    check_probability,
    log_add,
    log_binomial_pmf,
    log_binomial_pmf_vector,
    log_binomial_terms,
    log_convolve,
    log_factorial,
    log_factorials,
    log_lower_tails,
    log_subfactorial,
    log_sum_exp,
    log_upper_tails,
    normalise,
)


class TestLogSumExp:
    """Test log-sum-exp and the scalar log-add."""

    def test_examples(self):
        """Hand-computed sums, including an overflow-sized pair."""
        assert log_sum_exp([-math.inf, 0.0]) == 0.0
        assert log_sum_exp([math.log(0.25), math.log(0.75)]) == pytest.approx(0.0, abs=1e-15)
        assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2), rel=1e-15)

    def test_all_negative_infinity(self):
        """All -inf terms sum to -inf without NaN."""
        assert log_sum_exp([-math.inf, -math.inf]) == -math.inf

    def test_empty_raises(self):
        """An empty input is an error."""
        with pytest.raises(EmptyLogSumError, match="empty log-sum"):
            log_sum_exp([])

    @given(
        st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=20),
        st.floats(min_value=-1000, max_value=1000),
    )
    def test_shift_invariance(self, values, shift):
        """Shifting every term shifts the result."""
        shifted = log_sum_exp([v + shift for v in values])
        assert shifted == pytest.approx(log_sum_exp(values) + shift, abs=1e-9)

    @given(st.lists(st.floats(min_value=-30, max_value=30), min_size=2, max_size=10))
    def test_permutation_invariance(self, values):
        """Order does not matter."""
        assert log_sum_exp(values[::-1]) == pytest.approx(log_sum_exp(values), abs=1e-12)

    def test_log_add(self):
        """Two-term log-add with -inf on either side."""
        assert log_add(-math.inf, 1.5) == 1.5
        assert log_add(1.5, -math.inf) == 1.5
        assert log_add(math.log(0.2), math.log(0.3)) == pytest.approx(math.log(0.5), abs=1e-15)


class TestFactorials:
    """Test log-factorial and log-subfactorial tables."""

    def test_log_factorial_examples(self):
        """Small factorials and 20! in log space."""
        assert log_factorial(0) == 0.0
        assert log_factorial(5) == pytest.approx(math.log(120), rel=1e-15)
        assert log_factorial(20) == pytest.approx(math.log(2432902008176640000), rel=1e-12)

    def test_log_factorials_prefix(self):
        """The prefix table holds log i! for i = 0..n."""
        values = log_factorials(6)
        assert values.shape == (7,)
        assert np.allclose(np.exp(values), [math.factorial(i) for i in range(7)], rtol=1e-12)

    @pytest.mark.parametrize("bad", [-1, 2.5, True])
    def test_rejects_bad_arguments(self, bad):
        """Negative, fractional and boolean arguments are rejected."""
        with pytest.raises(DomainError):
            log_factorial(bad)
        with pytest.raises(DomainError):
            log_subfactorial(bad)

    def test_log_subfactorial_examples(self):
        """Derangement counts for 0, 1, 4 and 10 items."""
        assert log_subfactorial(0) == 0.0
        assert log_subfactorial(1) == -math.inf
        assert log_subfactorial(4) == pytest.approx(math.log(9), rel=1e-12)
        assert log_subfactorial(10) == pytest.approx(math.log(1334961), rel=1e-12)

    @pytest.mark.parametrize("n", range(2, 16))
    def test_subfactorial_matches_rounded_ratio(self, n):
        """D(n) is n!/e rounded to the nearest integer."""
        assert round(math.exp(log_subfactorial(n))) == round(math.factorial(n) / math.e)


class TestBinomial:
    """Test log binomial masses."""

    def test_examples(self):
        """Scalar masses at the endpoints and at one half."""
        assert log_binomial_pmf(0, 7, 0.0) == 0.0
        assert log_binomial_pmf(2, 2, 1.0) == 0.0
        assert log_binomial_pmf(1, 2, 0.5) == pytest.approx(math.log(0.5), abs=1e-15)

    def test_endpoints_are_point_masses(self):
        """theta = 0 and theta = 1 give point masses."""
        at_zero = log_binomial_pmf_vector(4, 0.0)
        at_one = log_binomial_pmf_vector(4, 1.0)
        assert at_zero[0] == 0.0 and np.all(at_zero[1:] == -np.inf)
        assert at_one[-1] == 0.0 and np.all(at_one[:-1] == -np.inf)

    @pytest.mark.parametrize("ell, n, theta", [(3, 2, 0.5), (0, 2, 1.5), (0, 2, -0.1)])
    def test_domain_errors(self, ell, n, theta):
        """ell above n and theta outside [0, 1] are rejected."""
        with pytest.raises(DomainError):
            log_binomial_pmf(ell, n, theta)

    @hyp_settings(max_examples=60)
    @given(st.integers(min_value=0, max_value=60), st.floats(min_value=0.0, max_value=1.0))
    def test_normalised(self, n, theta):
        """The mass vector sums to one."""
        total = np.exp(log_binomial_pmf_vector(n, theta)).sum()
        assert total == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [0, 1, 7, 40])
    @pytest.mark.parametrize("theta", [0.0, 0.03, 0.5, 0.97, 1.0])
    def test_vector_agrees_with_scalar_and_terms(self, n, theta):
        """The vector form matches the scalar mass and the log-probability form."""
        vector = log_binomial_pmf_vector(n, theta)
        scalar = [log_binomial_pmf(ell, n, theta) for ell in range(n + 1)]
        assert np.allclose(vector, scalar, rtol=1e-12, atol=1e-12)
        assert np.array_equal(vector == -np.inf, np.array(scalar) == -np.inf)
        if 0.0 < theta < 1.0:
            terms = log_binomial_terms(n, math.log(theta), math.log1p(-theta))
            assert np.allclose(terms, vector, rtol=1e-12, atol=1e-12)
            assert np.allclose(vector, stats.binom.logpmf(np.arange(n + 1), n, theta), rtol=1e-10)

    @pytest.mark.parametrize("p", [-0.1, 1.5, math.nan])
    def test_check_probability(self, p):
        """Values outside [0, 1], and NaN, are not probabilities."""
        with pytest.raises(DomainError, match="probability"):
            check_probability("theta", p)
        with pytest.raises(DomainError):
            log_binomial_pmf_vector(3, p)


class TestVectorHelpers:
    """Test convolution, tails and normalisation."""

    def test_convolution_of_two_item_classical(self):
        """Two games of the two-item problem, with the odd-total hole."""
        half = math.log(0.5)
        single = np.array([half, -np.inf, half])
        total = np.exp(log_convolve(single, single))
        assert np.allclose(total, [0.25, 0, 0.5, 0, 0.25], atol=1e-15)
        assert total[3] == 0.0

    def test_tails(self):
        """Lower and upper cumulative tails."""
        log_pmf = np.log(np.array([0.2, 0.3, 0.5]))
        assert np.allclose(np.exp(log_lower_tails(log_pmf)), [0.2, 0.5, 1.0])
        assert np.allclose(np.exp(log_upper_tails(log_pmf)), [1.0, 0.8, 0.5])

    def test_normalise(self):
        """normalise rescales masses to sum to one."""
        log_pmf = normalise(np.log(np.array([1.0, 3.0])))
        assert np.allclose(np.exp(log_pmf), [0.25, 0.75])
