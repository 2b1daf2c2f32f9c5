"""
Generalised matching distribution service.

Match(k | n, theta) is the law of L + K_{n-L} with L ~ Bin(n, theta) items known
to the allocator and the remaining items placed by a random permutation. The
total over m IID games, Match(t | n, m, theta), is built by log-space
convolution, or by a normal approximation when m is large.
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Union, overload

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from matching.config.settings import settings
from matching.errors import DomainError, PointMassAtInfinityError
from matching.models.distribution import (
    DistributionMethod,
    GMDParams,
    HDRRegion,
    Moments,
    Size,
    is_infinite,
)
from matching.services import oracle
from matching.services.classical import (
    ClassicalMatchingService,
    classical_service,
    stirling_second_kind,
)
from matching.services.numerics import (
    FloatArray,
    check_probability,
    log_binomial_pmf_vector,
    log_convolve,
    log_lower_tails,
    log_upper_tails,
    normalise,
)

logger = logging.getLogger(__name__)

SampleMethod = Literal["inverse", "two-step"]
Counts = Union[int, Sequence[int], NDArray[np.integer]]
Probabilities = Union[float, Sequence[float], FloatArray]


@dataclass(frozen=True)
class GMDDistribution:
    """
    Distribution of the total matches over m games.

    Finite sizes store log-masses over t = 0..nm. Infinite size (which forces
    theta = 0) stores the Poisson mean instead and is evaluated lazily.
    """

    params: GMDParams
    log_pmf: FloatArray
    method: DistributionMethod = "exact"
    poisson_mean: Optional[float] = None

    def __post_init__(self) -> None:
        self.log_pmf.flags.writeable = False

    @property
    def is_poisson(self) -> bool:
        return self.poisson_mean is not None

    @property
    def max_support(self) -> float:
        """Largest support point, nm (or infinity)."""
        if self.is_poisson:
            return math.inf
        return self.log_pmf.size - 1

    def log_prob(self, t: int) -> float:
        """log P(T = t); -inf outside the support."""
        if self.poisson_mean is not None:
            return float(stats.poisson.logpmf(t, self.poisson_mean))
        if 0 <= t < self.log_pmf.size:
            return float(self.log_pmf[t])
        return -math.inf

    def log_probs(self) -> FloatArray:
        """Log-masses over a finite support; Poisson tails beyond 1e-20 are dropped."""
        if self.poisson_mean is not None:
            upper = int(stats.poisson.isf(1e-20, self.poisson_mean)) + 1
            return np.asarray(
                stats.poisson.logpmf(np.arange(upper + 1), self.poisson_mean), dtype=np.float64
            )
        return self.log_pmf

    def last_positive(self) -> int:
        """Largest support point with positive mass (finite representation)."""
        return int(np.flatnonzero(self.log_probs() > -np.inf)[-1])


def _point_mass(at: int, length: int) -> FloatArray:
    log_pmf = np.full(length, -np.inf)
    log_pmf[at] = 0.0
    return log_pmf


class GeneralisedMatchingService:
    """Service for the generalised matching distribution and its probability functions."""

    def __init__(self, classical: Optional[ClassicalMatchingService] = None) -> None:
        """Initialize on top of a classical matching service."""
        self.classical = classical or classical_service

    # Construction

    def single_trial_log_pmf(self, n: Size, theta: float) -> FloatArray:
        """
        Log-masses of Match(k | n, theta) for k = 0..n.

        Mixes the classical rows: log_pmf[k] = logsumexp_l(log Bin(l|n,theta) + log Match(k-l | n-l)).
        For infinite size (theta = 0 only) returns Poisson(1) truncated at the configured point.
        """
        check_probability("theta", theta)
        if is_infinite(n):
            if theta > 0:
                raise PointMassAtInfinityError()
            k = np.arange(settings.poisson_truncation + 1)
            return normalise(np.asarray(stats.poisson.logpmf(k, 1.0), dtype=np.float64))
        size = int(n)
        if size == 0:
            return np.zeros(1)
        if size == 1:
            return _point_mass(1, 2)
        if theta == 1.0:
            return _point_mass(size, size + 1)

        table = self.classical.table(size)
        log_binom = log_binomial_pmf_vector(size, theta)
        log_pmf = np.full(size + 1, -np.inf)
        for ell in range(size + 1):
            if log_binom[ell] == -np.inf:
                continue
            # l known matches shift the classical row for the remaining n - l items
            log_pmf[ell:] = np.logaddexp(log_pmf[ell:], table.row(size - ell) + log_binom[ell])
        return normalise(log_pmf)

    def trials_distribution(
        self, params: GMDParams, approx: Optional[bool] = None
    ) -> GMDDistribution:
        """
        Distribution of the total matches over params.trials games.

        approx=None uses the normal approximation only above the configured
        trials threshold; degenerate cases are always exact.
        """
        m = params.trials
        if params.is_infinite:
            return GMDDistribution(params=params, log_pmf=np.empty(0), poisson_mean=float(m))
        n = int(params.size)
        top = int(params.max_total)
        if n == 0:
            return GMDDistribution(params=params, log_pmf=np.zeros(1))
        if n == 1:
            return GMDDistribution(params=params, log_pmf=_point_mass(m, m + 1))
        if params.prob == 1.0:
            return GMDDistribution(params=params, log_pmf=_point_mass(top, top + 1))

        use_approx = approx if approx is not None else m > settings.approx_trials_threshold
        if use_approx:
            logger.debug(f"Normal approximation for n={n}, m={m}, prob={params.prob}")
            single = self.moments(GMDParams(size=n, trials=1, prob=params.prob))
            t = np.arange(top + 1)
            log_density = stats.norm.logpdf(t, m * single.mean, math.sqrt(m * single.variance))
            return GMDDistribution(
                params=params,
                log_pmf=normalise(np.asarray(log_density, dtype=np.float64)),
                method="normal-approx",
            )

        single_log_pmf = self.single_trial_log_pmf(n, params.prob)
        total = single_log_pmf
        for _ in range(m - 1):
            total = log_convolve(total, single_log_pmf)
        logger.debug(f"Exact convolution for n={n}, m={m}, prob={params.prob}")
        return GMDDistribution(params=params, log_pmf=normalise(total))

    def distribution(
        self, size: Size, trials: int = 1, prob: float = 0.0, approx: Optional[bool] = None
    ) -> GMDDistribution:
        """Convenience wrapper building the parameters first."""
        return self.trials_distribution(GMDParams(size=size, trials=trials, prob=prob), approx)

    # Probability functions

    @overload
    def pmf(self, x: int, dist: GMDDistribution, log: bool = ...) -> float: ...

    @overload
    def pmf(self, x: Sequence[int], dist: GMDDistribution, log: bool = ...) -> FloatArray: ...

    def pmf(
        self, x: Counts, dist: GMDDistribution, log: bool = False
    ) -> Union[float, FloatArray]:
        """Mass at each argument; zero outside the support."""
        values = np.array([dist.log_prob(int(t)) for t in np.atleast_1d(x)], dtype=np.float64)
        if not log:
            values = np.exp(values)
        return float(values[0]) if np.ndim(x) == 0 else values

    @overload
    def cdf(
        self, t: int, dist: GMDDistribution, lower_tail: bool = ..., log_p: bool = ...
    ) -> float: ...

    @overload
    def cdf(
        self, t: Sequence[int], dist: GMDDistribution, lower_tail: bool = ..., log_p: bool = ...
    ) -> FloatArray: ...

    def cdf(
        self, t: Counts, dist: GMDDistribution, lower_tail: bool = True, log_p: bool = False
    ) -> Union[float, FloatArray]:
        """
        P(T <= t), or P(T > t) when lower_tail is False.

        The upper tail is summed directly over the tail masses rather than taken
        as one minus the CDF.
        """
        points = np.atleast_1d(np.asarray(t, dtype=np.int64))
        if dist.poisson_mean is not None:
            mu = dist.poisson_mean
            values = stats.poisson.logcdf(points, mu) if lower_tail else stats.poisson.logsf(points, mu)
            values = np.asarray(values, dtype=np.float64)
        else:
            last = dist.log_pmf.size - 1
            lower = log_lower_tails(dist.log_pmf)
            upper = np.append(log_upper_tails(dist.log_pmf)[1:], -np.inf)
            clipped = np.clip(points, 0, last)
            if lower_tail:
                values = np.where(points < 0, -np.inf, np.where(points >= last, 0.0, lower[clipped]))
            else:
                values = np.where(points < 0, 0.0, np.where(points >= last, -np.inf, upper[clipped]))
        values = np.minimum(values, 0.0)
        if not log_p:
            values = np.exp(values)
        return float(values[0]) if np.ndim(t) == 0 else values

    @overload
    def quantile(
        self, p: float, dist: GMDDistribution, lower_tail: bool = ..., log_p: bool = ...
    ) -> float: ...

    @overload
    def quantile(
        self, p: Sequence[float], dist: GMDDistribution, lower_tail: bool = ..., log_p: bool = ...
    ) -> FloatArray: ...

    def quantile(
        self, p: Probabilities, dist: GMDDistribution, lower_tail: bool = True, log_p: bool = False
    ) -> Union[float, FloatArray]:
        """
        Smallest support point t with CDF(t) >= p.

        p = 0 gives the smallest point with positive mass. Values are integral
        floats so the Poisson case can return infinity at p = 1.
        """
        probs = np.atleast_1d(np.asarray(p, dtype=np.float64))
        if log_p:
            if np.any(probs > 0):
                raise DomainError("log probabilities must be <= 0")
            probs = np.exp(probs)
        if np.any((probs < 0) | (probs > 1)) or np.any(np.isnan(probs)):
            raise DomainError(f"probabilities must lie in [0, 1], got {p}")
        if not lower_tail:
            probs = 1.0 - probs

        if dist.poisson_mean is not None:
            values = np.asarray(stats.poisson.ppf(probs, dist.poisson_mean), dtype=np.float64)
            values = np.where(probs == 0, 0.0, values)
        else:
            log_pmf = dist.log_pmf
            cdf = np.exp(log_lower_tails(log_pmf))
            positive = log_pmf > -np.inf
            last = dist.last_positive()
            values = np.empty(probs.size)
            for i, target in enumerate(probs):
                reached = positive & (cdf >= target - settings.quantile_tol)
                values[i] = float(np.argmax(reached)) if reached.any() else float(last)
        return float(values[0]) if np.ndim(p) == 0 else values

    def sample(
        self,
        dist: GMDDistribution,
        count: int,
        rng: np.random.Generator,
        method: SampleMethod = "inverse",
    ) -> NDArray[np.int64]:
        """Draw totals by inverse-transform sampling, or by simulating the two-step game."""
        if count < 0:
            raise DomainError(f"count must be non-negative, got {count}")
        params = dist.params
        if method == "two-step":
            if params.is_infinite:
                raise DomainError("two-step simulation needs a finite size")
            return oracle.simulate_totals(int(params.size), params.prob, params.trials, count, rng)

        u = rng.random(count)
        if dist.poisson_mean is not None:
            draws = np.asarray(stats.poisson.ppf(u, dist.poisson_mean))
            return np.maximum(draws, 0).astype(np.int64)
        cdf = np.exp(log_lower_tails(dist.log_pmf))
        draws = np.searchsorted(cdf, u, side="right")
        return np.minimum(draws, dist.last_positive()).astype(np.int64)

    # Summaries

    def moments(
        self, params: GMDParams, asymptotic: bool = False, include_sd: bool = False
    ) -> Moments:
        """
        Mean, variance, skewness and kurtosis of the total matches.

        Single-game moments come from the closed-form polynomials (or their
        large-n equivalents when asymptotic is set) and are scaled to m games by
        the IID cumulant rules.
        """
        m = params.trials
        if params.is_infinite:
            mean, variance, skew, kurt = 1.0, 1.0, 1.0, 4.0
        else:
            mean, variance, skew, kurt = self._single_trial_moments(
                int(params.size), params.prob, asymptotic
            )
        result_skew = None if skew is None else skew / math.sqrt(m)
        result_kurt = None if kurt is None else 3.0 + (kurt - 3.0) / m
        return Moments(
            mean=m * mean,
            variance=m * variance,
            skewness=result_skew,
            kurtosis=result_kurt,
            sd=math.sqrt(m * variance) if include_sd else None,
        )

    def _single_trial_moments(
        self, n: int, theta: float, asymptotic: bool
    ) -> "tuple[float, float, Optional[float], Optional[float]]":
        if n == 0:
            return 0.0, 0.0, None, None
        if n == 1:
            return 1.0, 0.0, None, None
        if theta == 1.0:
            return float(n), 0.0, None, None
        if asymptotic:
            spread = n * theta * (1 - theta)
            return (
                1 + n * theta,
                1 + spread,
                (1 + spread * (1 - 2 * theta)) / (1 + spread) ** 1.5,
                3 + (1 + spread * (6 * theta**2 - 6 * theta + 1)) / (1 + spread) ** 2,
            )

        th = theta
        mean = 1 + n * th - th**n
        variance = 1 - th ** (2 * n) + n * (th - th**2 - th ** (n - 1) - th**n + 2 * th ** (n + 1))
        third = (
            1
            + n * th * (1 - 3 * th + 2 * th**2)
            - n * (n - 1) / 2 * th ** (n - 2)
            - n * (2 * n - 1) * th ** (n - 1)
            + (5 * n**2 - 3 * n + 2) / 2 * th**n
            + 3 * n * (n + 1) * th ** (n + 1)
            - 3 * n * (n + 1) * th ** (n + 2)
            - 3 * n * th ** (2 * n - 1)
            - 3 * n * th ** (2 * n)
            + 6 * n * th ** (2 * n + 1)
            - 2 * th ** (3 * n)
        )
        fourth = self._central_moment_by_mixture(n, theta, 4, mean)
        return mean, variance, third / variance**1.5, fourth / variance**2

    def _central_moment_by_mixture(self, n: int, theta: float, order: int, mean: float) -> float:
        """E[(K* - mean)^order] by conditioning on the number of known items."""
        weights = np.exp(log_binomial_pmf_vector(n, theta))
        remaining = n - np.arange(n + 1)
        deviation = np.arange(n + 1) - mean
        total = np.zeros(n + 1)
        for j in range(order + 1):
            # E(K_s^j) = sum_{i <= min(j, s)} S(j, i)
            partial = np.cumsum(np.asarray(stirling_second_kind(j), dtype=np.float64))
            raw = partial[np.minimum(j, remaining)]
            total += math.comb(order, j) * deviation ** (order - j) * raw
        return float(np.dot(weights, total))

    def mgf(self, t: float, n: Size, theta: float) -> float:
        """Moment generating function of a single game."""
        check_probability("theta", theta)
        if is_infinite(n):
            if theta > 0:
                raise PointMassAtInfinityError()
            return math.exp(math.expm1(t))
        size = int(n)
        base = math.expm1(t)
        q = theta * math.exp(t) + 1 - theta
        p_star = theta * math.exp(t) / q
        scale = q**size
        total = 0.0
        term = 1.0
        for i in range(size + 1):
            if i > 0:
                term *= base / i
            total += term * scale * float(stats.binom.cdf(size - i, size, p_star))
        return total

    def hdr(
        self, cover_prob: float, params: GMDParams, approx: Optional[bool] = None
    ) -> HDRRegion:
        """
        Highest density region by greedy accumulation of the largest masses.

        Ties go to the smaller support point; accumulation stops at the first
        point where the covered mass reaches cover_prob.
        """
        if not 0.0 < cover_prob < 1.0:
            raise DomainError(f"cover_prob must lie strictly between 0 and 1, got {cover_prob}")
        dist = self.trials_distribution(params, approx)
        log_probs = dist.log_probs()
        order = np.argsort(-np.round(log_probs, 12), kind="stable")
        covered = np.cumsum(np.exp(log_probs[order]))
        positive = int(np.count_nonzero(log_probs > -np.inf))
        stop = min(int(np.searchsorted(covered, cover_prob, side="left")), positive - 1)
        points = sorted(int(t) for t in order[: stop + 1])
        return HDRRegion(
            params=params,
            cover_prob=cover_prob,
            points=points,
            coverage=min(float(covered[stop]), 1.0),
            contiguous=points[-1] - points[0] + 1 == len(points),
            method=dist.method,
        )

    def closed_form_pmf(self, k: int, n: int, theta: float) -> float:
        """Match(k|n) (1-theta)^(n-k) E[(n)_B] with B ~ Bin(k, theta); a cross-check path."""
        if not 0 <= k <= n:
            raise DomainError(f"k={k} outside 0..{n}")
        ell = np.arange(k + 1)
        falling = np.array([math.perm(n, int(i)) for i in ell], dtype=np.float64)
        expectation = float(np.dot(falling, stats.binom.pmf(ell, k, theta)))
        return self.classical.table(n).pmf(k, n) * (1 - theta) ** (n - k) * expectation


# Global generalised matching service instance
generalised_service = GeneralisedMatchingService()
