"""
Matching tests on the total number of matches, critical values and power.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from matching.config.settings import settings
from matching.errors import DegenerateNullError, DomainError
from matching.models.distribution import GMDParams
from matching.models.hypothesis import Alternative, PowerCurve, PowerPoint, TestResult
from matching.models.inference import Dataset
from matching.services.generalised import GeneralisedMatchingService, generalised_service
from matching.services.numerics import log_upper_tails

logger = logging.getLogger(__name__)


def _check_null(null_prob: float) -> None:
    if null_prob == 1.0:
        raise DegenerateNullError(null_prob)
    if not 0.0 <= null_prob < 1.0:
        raise DomainError(f"null probability must lie in [0, 1), got {null_prob}")


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"significance level must lie strictly between 0 and 1, got {alpha}")


class MatchingTestService:
    """Service for hypothesis tests about the matching probability."""

    def __init__(self, generalised: Optional[GeneralisedMatchingService] = None) -> None:
        """Initialize on top of a generalised matching service."""
        self.generalised = generalised or generalised_service

    def matching_test(
        self,
        data: Dataset,
        null_prob: float = 0.0,
        alternative: Alternative = "greater",
        approx: Optional[bool] = None,
    ) -> TestResult:
        """
        p-value of the observed total under Match(t | n, m, null_prob).

        greater: P(T >= t_obs). less: P(T <= t_obs). two-sided: total mass of
        outcomes no more probable than t_obs, ties within a relative tolerance.
        """
        _check_null(null_prob)
        params = GMDParams(size=data.size, trials=data.trials, prob=null_prob)
        dist = self.generalised.trials_distribution(params, approx)
        observed = data.total

        if alternative == "greater":
            p_value = self.generalised.cdf(observed - 1, dist, lower_tail=False)
        elif alternative == "less":
            p_value = self.generalised.cdf(observed, dist)
        else:
            threshold = dist.log_prob(observed) + math.log1p(settings.two_sided_rel_tol)
            selected = dist.log_pmf[dist.log_pmf <= threshold]
            p_value = math.exp(float(logsumexp(selected))) if selected.size else 0.0

        logger.debug(f"Matching test t_obs={observed}, alternative={alternative}, p={p_value:.6g}")
        return TestResult(
            size=data.size,
            trials=data.trials,
            observed_total=observed,
            mean_matches=data.mean,
            null_prob=null_prob,
            alternative=alternative,
            p_value=min(max(p_value, 0.0), 1.0),
            method=dist.method,
        )

    def critical_value(
        self, n: int, m: int, alpha: float, approx: Optional[bool] = None
    ) -> int:
        """Smallest t in 0..nm+1 with null upper-tail mass below alpha; nm+1 means no rejection."""
        _check_alpha(alpha)
        dist = self.generalised.trials_distribution(GMDParams(size=n, trials=m, prob=0.0), approx)
        if dist.is_poisson:
            raise DomainError("critical values need a finite size")
        tails = np.append(log_upper_tails(dist.log_pmf), -np.inf)
        return int(np.argmax(tails < math.log(alpha)))

    def power(
        self, theta: float, n: int, m: int, alpha: float, approx: Optional[bool] = None
    ) -> float:
        """P(T >= t_star | n, m, theta) for the canonical test."""
        t_star = self.critical_value(n, m, alpha, approx)
        return self._power_at(theta, n, m, t_star, approx)

    def _power_at(
        self, theta: float, n: int, m: int, t_star: int, approx: Optional[bool]
    ) -> float:
        params = GMDParams(size=n, trials=m, prob=theta)
        if t_star > params.max_total:
            return 0.0
        dist = self.generalised.trials_distribution(params, approx)
        return min(self.generalised.cdf(t_star - 1, dist, lower_tail=False), 1.0)

    def power_curve(
        self,
        n: int,
        m: int,
        alpha: float,
        thetas: Sequence[float],
        approx: Optional[bool] = None,
    ) -> PowerCurve:
        """Power over a grid of probabilities, with one critical value computation."""
        t_star = self.critical_value(n, m, alpha, approx)
        points = [
            PowerPoint(theta=theta, power=self._power_at(theta, n, m, t_star, approx))
            for theta in thetas
        ]
        return PowerCurve(size=n, trials=m, alpha=alpha, t_star=t_star, points=points)

    @staticmethod
    def n2_success_prob(theta: float) -> float:
        """Probability of matching both items when n = 2."""
        if not 0.0 <= theta <= 1.0:
            raise DomainError(f"theta must be a probability in [0, 1], got {theta}")
        return (1 + 2 * theta - theta**2) / 2

    def binomial_reduction_test(
        self,
        data: Dataset,
        null_prob: float = 0.0,
        alternative: Alternative = "greater",
    ) -> TestResult:
        """Exact binomial test on the number of fully matched games, valid for n = 2."""
        if data.size != 2:
            raise DomainError(f"the binomial reduction needs size 2, got {data.size}")
        _check_null(null_prob)
        successes = sum(1 for k in data.observations if k == 2)
        result = stats.binomtest(
            successes, data.trials, p=self.n2_success_prob(null_prob), alternative=alternative
        )
        return TestResult(
            size=2,
            trials=data.trials,
            observed_total=data.total,
            mean_matches=data.mean,
            null_prob=null_prob,
            alternative=alternative,
            p_value=float(result.pvalue),
            method="exact-binomial",
        )


# Global matching test service instance
matching_test_service = MatchingTestService()
