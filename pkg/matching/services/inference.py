"""
Estimation of the matching probability from observed match counts.

Likelihood, score and Hessian in theta and in the half-logit phi = logit(theta) / 2,
maximum likelihood by safeguarded Newton iteration in phi, asymptotic and
bootstrap intervals with a data-dependent tail split, and method of moments.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, log_expit, logit, logsumexp

from matching.config.settings import settings
from matching.errors import BoundaryError, ConvergenceError, DomainError, MOMUndefinedError
from matching.models.inference import (
    BoundaryFlag,
    CIMethod,
    Dataset,
    MLEResult,
    TailSplit,
)
from matching.services.classical import ClassicalMatchingService, classical_service
from matching.services.numerics import FloatArray, log_binomial_terms

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


@dataclass(frozen=True)
class LikelihoodKernel:
    """
    Data-dependent part of the likelihood.

    Row i holds log Match(k_i - l | n - l) for l = 0..n, for each distinct
    observed value k_i, so the likelihood at any theta is one mixture per row.
    """

    size: int
    values: FloatArray
    counts: FloatArray
    log_match: FloatArray

    @property
    def trials(self) -> int:
        return int(self.counts.sum())

    def posterior(self, log_p: float, log_q: float) -> Tuple[FloatArray, FloatArray]:
        """Per-value log-likelihoods and the posterior weights over the known count l."""
        terms = self.log_match + log_binomial_terms(self.size, log_p, log_q)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_lik = np.asarray(logsumexp(terms, axis=1), dtype=np.float64)
            weights = np.exp(terms - log_lik[:, None])
        return log_lik, weights


class InferenceService:
    """Service for likelihood-based and moment-based estimation."""

    def __init__(self, classical: Optional[ClassicalMatchingService] = None) -> None:
        """Initialize on top of a classical matching service."""
        self.classical = classical or classical_service

    def kernel(self, data: Dataset) -> LikelihoodKernel:
        return self._kernel(data.size, np.asarray(data.observations))

    def _kernel(self, n: int, observations: np.ndarray) -> LikelihoodKernel:
        values, counts = np.unique(observations, return_counts=True)
        table = self.classical.table(n)
        log_match = np.full((values.size, n + 1), -np.inf)
        for i, k in enumerate(values):
            for ell in range(int(k) + 1):
                log_match[i, ell] = table.log_pmf(int(k) - ell, n - ell)
        return LikelihoodKernel(
            size=n,
            values=values.astype(np.float64),
            counts=counts.astype(np.float64),
            log_match=log_match,
        )

    # Likelihood

    def log_likelihood(self, data: Dataset, theta: float) -> float:
        """Sum of log Match(k_i | n, theta); -inf when an observation is impossible."""
        if not 0.0 <= theta <= 1.0:
            raise DomainError(f"theta must be a probability in [0, 1], got {theta}")
        log_p = math.log(theta) if theta > 0 else -math.inf
        log_q = math.log1p(-theta) if theta < 1 else -math.inf
        kernel = self.kernel(data)
        log_lik, _ = kernel.posterior(log_p, log_q)
        return self._total(log_lik, kernel.counts)

    def log_likelihood_phi(self, data: Dataset, phi: float) -> float:
        """Log-likelihood at theta = expit(2 phi)."""
        kernel = self.kernel(data)
        log_lik, _ = kernel.posterior(float(log_expit(2 * phi)), float(log_expit(-2 * phi)))
        return self._total(log_lik, kernel.counts)

    @staticmethod
    def _total(log_lik: FloatArray, counts: FloatArray) -> float:
        if np.any(log_lik == -np.inf):
            return -math.inf
        return float(np.dot(counts, log_lik))

    @staticmethod
    def _moments_of_weights(
        kernel: LikelihoodKernel, weights: FloatArray, theta: float
    ) -> Tuple[FloatArray, FloatArray]:
        """Per-value posterior means of (l - n theta) and of the second-derivative numerator."""
        n = kernel.size
        ell = np.arange(n + 1, dtype=np.float64)
        first = weights @ (ell - n * theta)
        second = weights @ (ell * (ell - 1) - 2 * ell * (n - 1) * theta + n * (n - 1) * theta**2)
        return first, second

    def score_and_hessian_theta(self, data: Dataset, theta: float) -> Tuple[float, float]:
        """Summed score and Hessian with respect to theta, for 0 < theta < 1."""
        if theta <= 0.0 or theta >= 1.0:
            raise BoundaryError(
                f"score in theta is undefined at theta={theta}; use the one-sided limit"
            )
        kernel = self.kernel(data)
        _, weights = kernel.posterior(math.log(theta), math.log1p(-theta))
        first, second = self._moments_of_weights(kernel, weights, theta)
        spread = theta * (1 - theta)
        scores = first / spread
        hessians = second / spread**2 - scores**2
        return float(np.dot(kernel.counts, scores)), float(np.dot(kernel.counts, hessians))

    def score_and_hessian_phi(self, data: Dataset, phi: float) -> Tuple[float, float]:
        """Summed score and Hessian with respect to phi."""
        return self._score_and_hessian_phi(self.kernel(data), phi)

    def _score_and_hessian_phi(self, kernel: LikelihoodKernel, phi: float) -> Tuple[float, float]:
        if not math.isfinite(phi):
            raise DomainError(f"phi must be finite, got {phi}")
        theta = float(expit(2 * phi))
        _, weights = kernel.posterior(float(log_expit(2 * phi)), float(log_expit(-2 * phi)))
        first, second = self._moments_of_weights(kernel, weights, theta)
        scores = 2 * first
        hessians = 4 * second - 4 * (theta - 0.5) * scores - scores**2
        return float(np.dot(kernel.counts, scores)), float(np.dot(kernel.counts, hessians))

    # Point estimation

    def mle(self, data: Dataset) -> MLEResult:
        """Maximum likelihood estimate; boundary values when the mean count is at most 1 or equals n."""
        kernel = self.kernel(data)
        theta_hat, phi_hat, iterations, flag = self._solve(kernel, data.mean)
        if flag == "none":
            max_loglik = self._total(
                kernel.posterior(float(log_expit(2 * phi_hat)), float(log_expit(-2 * phi_hat)))[0],
                kernel.counts,
            )
        else:
            max_loglik = self.log_likelihood(data, theta_hat)
        return MLEResult(
            size=data.size,
            trials=data.trials,
            theta_hat=theta_hat,
            phi_hat=phi_hat,
            max_loglik=max_loglik,
            likelihood_per_point=math.exp(max_loglik / data.trials),
            iterations=iterations,
            boundary_flag=flag,
        )

    def _solve(self, kernel: LikelihoodKernel, mean: float) -> Tuple[float, float, int, BoundaryFlag]:
        n = kernel.size
        if n == 1:
            raise DomainError("the matching probability is not identifiable for size 1")
        if mean <= 1.0:
            return 0.0, -math.inf, 0, "at-zero"
        if mean >= n:
            return 1.0, math.inf, 0, "at-one"

        def score(phi: float) -> float:
            return self._score_and_hessian_phi(kernel, phi)[0]

        start = 0.5 * float(logit(min(max(self._approx(n, mean), 1e-6), 1 - 1e-6)))
        lo, hi = self._bracket(score, start)
        phi = min(max(start, lo), hi)
        s = h = math.nan
        for iteration in range(1, settings.mle_max_iter + 1):
            s, h = self._score_and_hessian_phi(kernel, phi)
            theta = float(expit(2 * phi))
            # The theta-score is the phi-score over d theta / d phi = 2 theta (1 - theta)
            if abs(s) <= settings.mle_score_tol * 2 * theta * (1 - theta):
                return theta, phi, iteration, "none"
            # The summed score is decreasing in phi
            if s > 0:
                lo = phi
            else:
                hi = phi
            candidate = phi - s / h if h < 0 else math.nan
            if not lo < candidate < hi:
                candidate = 0.5 * (lo + hi)
            step = candidate - phi
            phi = candidate
            logger.debug(f"Newton iteration {iteration}: phi={phi:.12g}, score={s:.3e}")
            if abs(step) <= settings.mle_step_tol or hi - lo <= settings.mle_step_tol:
                return float(expit(2 * phi)), phi, iteration, "none"
        raise ConvergenceError("MLE did not converge", last_phi=phi, last_score=s)

    @staticmethod
    def _bracket(score: Callable[[float], float], start: float) -> Tuple[float, float]:
        width = 1.0
        lo, hi = start - width, start + width
        for _ in range(60):
            if score(lo) > 0:
                break
            hi = lo
            width *= 2
            lo = start - width
        else:
            raise ConvergenceError("could not bracket the MLE from below", last_phi=lo, last_score=score(lo))
        width = 1.0
        for _ in range(60):
            if score(hi) < 0:
                return lo, hi
            lo = hi
            width *= 2
            hi = start + width
        raise ConvergenceError("could not bracket the MLE from above", last_phi=hi, last_score=score(hi))

    def mom_estimate(self, data: Dataset) -> float:
        """Root in [0, 1] of theta^n - n theta + max(mean - 1, 0)."""
        n = data.size
        if n <= 1:
            raise MOMUndefinedError(n)
        mean = data.mean
        if mean <= 1.0:
            return 0.0
        if mean >= n:
            return 1.0
        offset = mean - 1.0
        root = optimize.brentq(lambda th: th**n - n * th + offset, 0.0, 1.0, xtol=settings.mom_tol)
        return float(root)

    def mom_approx(self, data: Dataset) -> float:
        """Approximate moment estimate max(mean - 1, 0) / (n - 1)."""
        if data.size <= 1:
            raise MOMUndefinedError(data.size)
        return self._approx(data.size, data.mean)

    @staticmethod
    def _approx(n: int, mean: float) -> float:
        return min(max(mean - 1.0, 0.0) / (n - 1), 1.0)

    # Interval estimation

    @staticmethod
    def tail_split(alpha: float, alpha0: float, split: TailSplit = "fractional") -> Tuple[float, float]:
        """Split the total tail mass alpha into (lower, upper) tail masses."""
        if split == "fractional":
            return alpha * alpha0, alpha * (1 - alpha0)
        lower = min(alpha0, alpha)
        return lower, alpha - lower

    def _tails(self, data: Dataset, level: float, split: TailSplit) -> Tuple[float, float]:
        if not 0.0 < level < 1.0:
            raise DomainError(f"confidence level must lie strictly between 0 and 1, got {level}")
        alpha0 = self._approx(data.size, data.mean) if data.size > 1 else 0.0
        return self.tail_split(1.0 - level, alpha0, split)

    def ci_asymptotic(
        self,
        data: Dataset,
        level: Optional[float] = None,
        tail_split: TailSplit = "fractional",
        estimate: Optional[MLEResult] = None,
    ) -> Interval:
        """
        Wald interval in phi from the observed information, mapped back to theta.

        A boundary MLE has no Wald interval: at theta_hat = 0 the lower bound is pinned to 0
        and at theta_hat = 1 the upper bound to 1, the other end is left at the far edge of
        [0, 1] and a warning points to the bootstrap. An interior estimate with non-positive
        observed information raises BoundaryError.
        """
        level = level if level is not None else settings.conf_level
        lower_tail, upper_tail = self._tails(data, level, tail_split)
        fit = estimate or self.mle(data)
        if fit.boundary_flag != "none":
            logger.warning(
                f"MLE is on the boundary ({fit.boundary_flag}); the asymptotic interval is pinned "
                f"to [0, 1], use the bootstrap interval instead"
            )
            return 0.0, 1.0
        _, hessian = self.score_and_hessian_phi(data, fit.phi_hat)
        if hessian >= 0:
            raise BoundaryError(
                "observed information is not positive; use the bootstrap interval instead"
            )
        se = 1.0 / math.sqrt(-hessian)
        z_lo = float(stats.norm.ppf(lower_tail))
        z_hi = float(stats.norm.isf(upper_tail))
        lower = float(expit(2 * (fit.phi_hat + z_lo * se)))
        upper = float(expit(2 * (fit.phi_hat + z_hi * se)))
        return min(lower, fit.theta_hat), max(upper, fit.theta_hat)

    def ci_bootstrap(
        self,
        data: Dataset,
        level: Optional[float] = None,
        resamples: Optional[int] = None,
        seed: Optional[int] = None,
        tail_split: TailSplit = "fractional",
        estimate: Optional[MLEResult] = None,
    ) -> Interval:
        """
        Percentile interval from MLEs of with-replacement resamples.

        Resample i draws from a generator seeded by child i of the master seed,
        so results depend only on the seed and the resample count.
        """
        level = level if level is not None else settings.conf_level
        resamples = resamples if resamples is not None else settings.bootstrap_sims
        if resamples < 1:
            raise DomainError(f"resamples must be at least 1, got {resamples}")
        seed = seed if seed is not None else settings.default_seed
        if seed is None:
            logger.warning("Bootstrap run without a seed; the interval is not reproducible")
        lower_tail, upper_tail = self._tails(data, level, tail_split)
        theta_hat = (estimate or self.mle(data)).theta_hat

        observations = np.asarray(data.observations)
        estimates = np.empty(resamples)
        for i, child in enumerate(np.random.SeedSequence(seed).spawn(resamples)):
            rng = np.random.default_rng(child)
            resample = rng.choice(observations, size=observations.size, replace=True)
            kernel = self._kernel(data.size, resample)
            estimates[i] = self._solve(kernel, float(resample.mean()))[0]
        logger.debug(f"Bootstrap finished {resamples} resamples")

        lower = float(np.quantile(estimates, lower_tail))
        upper = float(np.quantile(estimates, 1.0 - upper_tail))
        return min(lower, theta_hat), max(upper, theta_hat)

    def fit(
        self,
        data: Dataset,
        ci_method: Optional[CIMethod] = "asymptotic",
        level: Optional[float] = None,
        resamples: Optional[int] = None,
        seed: Optional[int] = None,
        tail_split: TailSplit = "fractional",
    ) -> MLEResult:
        """MLE with the requested interval filled in."""
        estimate = self.mle(data)
        if ci_method is None:
            return estimate
        level = level if level is not None else settings.conf_level
        if ci_method == "bootstrap":
            ci = self.ci_bootstrap(data, level, resamples, seed, tail_split, estimate)
        else:
            ci = self.ci_asymptotic(data, level, tail_split, estimate)
        return MLEResult.model_validate(
            {**estimate.model_dump(), "ci": ci, "ci_method": ci_method, "conf_level": level}
        )


# Global inference service instance
inference_service = InferenceService()
