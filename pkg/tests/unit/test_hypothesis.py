"""
Unit tests for matching tests and power.
"""
import math

import numpy as np
import pytest
from scipy import stats

from matching.errors import DegenerateNullError, DomainError
from matching.models.inference import Dataset


class TestMatchingTest:
    """Test p-values of the matching test."""

    def test_canonical_reference(self, tests_service, reference_data):
        """The canonical test on the reference data."""
        result = tests_service.matching_test(reference_data)
        assert result.observed_total == 65
        assert result.mean_matches == pytest.approx(1.625)
        assert result.method == "exact"
        assert result.p_value == pytest.approx(0.0001726, abs=5e-8)

    def test_positive_null_reference(self, tests_service, reference_data):
        """The reference data against a null of theta = 0.05."""
        result = tests_service.matching_test(reference_data, null_prob=0.05)
        assert result.p_value == pytest.approx(0.8134, abs=5e-5)

    def test_two_items_match_binomial(self, tests_service, two_item_data):
        """For two items the test equals a binomial test on the number of full matches."""
        result = tests_service.matching_test(two_item_data)
        assert result.p_value == pytest.approx(0.6178, abs=5e-5)
        assert result.p_value == pytest.approx(stats.binom.sf(48, 100, 0.5), abs=1e-12)
        reduced = tests_service.binomial_reduction_test(two_item_data)
        assert reduced.method == "exact-binomial"
        assert reduced.p_value == pytest.approx(result.p_value, abs=1e-12)

    def test_zero_total_gives_one(self, tests_service):
        """A zero total gives p = 1."""
        result = tests_service.matching_test(Dataset(size=5, observations=(0, 0, 0)))
        assert result.p_value == 1.0

    def test_less_and_two_sided(self, tests_service):
        """Lower and two-sided alternatives on a single game."""
        data = Dataset(size=2, observations=(0,))
        less = tests_service.matching_test(data, alternative="less")
        assert less.p_value == pytest.approx(0.5)
        # Ties at equal mass are included
        both = tests_service.matching_test(data, alternative="two-sided")
        assert both.p_value == pytest.approx(1.0)

    def test_two_sided_excludes_more_probable(self, tests_service):
        """Two-sided p-values only count outcomes no more probable than the observed one."""
        data = Dataset(size=4, observations=(4,))
        result = tests_service.matching_test(data, alternative="two-sided")
        # masses 9/24, 8/24, 6/24, 0, 1/24: only t = 4 is as improbable
        assert result.p_value == pytest.approx(1 / 24)

    def test_degenerate_null(self, tests_service, reference_data):
        """theta = 1 and negative null probabilities are rejected."""
        with pytest.raises(DegenerateNullError):
            tests_service.matching_test(reference_data, null_prob=1.0)
        with pytest.raises(DomainError):
            tests_service.matching_test(reference_data, null_prob=-0.1)

    def test_greater_p_monotone(self, tests_service):
        """The upper p-value falls strictly as the total rises."""
        pairs = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (0, 5), (3, 3), (2, 5), (3, 5), (5, 5)]
        values = [
            tests_service.matching_test(Dataset(size=5, observations=pair)).p_value
            for pair in pairs
        ]
        assert values[0] == 1.0
        assert all(later < earlier for earlier, later in zip(values, values[1:]))

    def test_exact_and_normal_agree(self, tests_service):
        """Exact and normal p-values agree for many games."""
        data = Dataset(size=10, observations=(2,) * 120)
        exact = tests_service.matching_test(data, null_prob=0.1, approx=False)
        approx = tests_service.matching_test(data, null_prob=0.1)
        assert approx.method == "normal-approx"
        assert abs(exact.p_value - approx.p_value) <= 0.01


class TestCriticalValueAndPower:
    """Test rejection regions and power functions."""

    @pytest.mark.parametrize(
        "n, m, alpha, expected", [(2, 1, 0.05, 3), (4, 1, 0.05, 3), (4, 1, 0.01, 5)]
    )
    def test_critical_values(self, tests_service, n, m, alpha, expected):
        """Smallest totals with null tail mass below alpha."""
        assert tests_service.critical_value(n, m, alpha) == expected

    def test_bad_alpha(self, tests_service):
        """alpha must lie strictly inside (0, 1)."""
        with pytest.raises(DomainError):
            tests_service.critical_value(4, 1, 0.0)

    def test_power_examples(self, tests_service):
        """Power at reference points, including an empty rejection region."""
        assert tests_service.power(0.5, 4, 1, 0.05) == pytest.approx(0.5442708, abs=1e-7)
        assert tests_service.power(1.0, 4, 1, 0.05) == pytest.approx(1.0)
        assert tests_service.power(0.0, 4, 1, 0.05) <= 0.05
        assert tests_service.power(0.7, 2, 1, 0.05) == 0.0

    def test_curve(self, tests_service):
        """A power curve is monotone and at most alpha at theta = 0."""
        grid = [i / 20 for i in range(21)]
        curve = tests_service.power_curve(4, 1, 0.05, grid)
        assert curve.t_star == 3
        assert not curve.rejection_region_empty
        powers = [p.power for p in curve.points]
        assert powers[0] <= 0.05
        assert powers[-1] == pytest.approx(1.0)
        assert powers[10] == pytest.approx(0.5442708, abs=1e-7)
        assert all(b - a >= -1e-12 for a, b in zip(powers, powers[1:]))

    def test_empty_region_curve(self, tests_service):
        """With no rejection region the power is zero everywhere."""
        curve = tests_service.power_curve(2, 1, 0.05, [0.0, 0.5, 1.0])
        assert curve.rejection_region_empty
        assert [p.power for p in curve.points] == [0.0, 0.0, 0.0]

    @pytest.mark.parametrize("n, m", [(4, 2), (6, 3), (10, 1), (8, 5)])
    def test_power_monotone(self, tests_service, n, m):
        """Power curves are monotone for several sizes and game counts."""
        grid = np.linspace(0.0, 1.0, 26)
        powers = [p.power for p in tests_service.power_curve(n, m, 0.05, grid).points]
        assert powers[0] <= 0.05
        assert all(b - a >= -1e-12 for a, b in zip(powers, powers[1:]))

    def test_power_grows_with_size(self, tests_service):
        """Power grows with the number of items."""
        small = tests_service.power(0.2, 10, 1, 0.05)
        medium = tests_service.power(0.2, 50, 1, 0.05)
        large = tests_service.power(0.2, 200, 1, 0.05)
        assert medium > small
        assert large > 0.99


class TestTwoItemReduction:
    """Test the n = 2 binomial reduction."""

    def test_success_prob(self, tests_service):
        """The two-item success probability at known points, increasing in theta."""
        assert tests_service.n2_success_prob(0.0) == 0.5
        assert tests_service.n2_success_prob(1.0) == 1.0
        assert tests_service.n2_success_prob(0.5) == pytest.approx(0.875)
        grid = np.linspace(0, 1, 50)
        values = [tests_service.n2_success_prob(float(th)) for th in grid]
        assert all(b > a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("theta", [0.0, 0.3, 0.8])
    @pytest.mark.parametrize("m", [1, 4, 11])
    def test_totals_are_binomial(self, generalised, tests_service, theta, m):
        """Totals for two items are twice a binomial count."""
        dist = generalised.distribution(2, trials=m, prob=theta)
        probs = np.exp(dist.log_pmf)
        expected = stats.binom.pmf(np.arange(m + 1), m, tests_service.n2_success_prob(theta))
        assert np.allclose(probs[0::2], expected, atol=1e-12)
        assert np.all(probs[1::2] == 0.0)

    def test_reduction_needs_two_items(self, tests_service, reference_data):
        """The binomial reduction needs exactly two items."""
        with pytest.raises(DomainError):
            tests_service.binomial_reduction_test(reference_data)

    def test_reduction_alternatives(self, tests_service, two_item_data):
        """Lower-tail and shifted-null binomial reductions."""
        less = tests_service.binomial_reduction_test(two_item_data, alternative="less")
        assert less.p_value == pytest.approx(stats.binom.cdf(49, 100, 0.5))
        shifted = tests_service.binomial_reduction_test(two_item_data, null_prob=0.2)
        assert shifted.p_value == pytest.approx(stats.binom.sf(48, 100, 0.5 * (1 + 0.4 - 0.04)))
        assert math.isfinite(shifted.p_value)
