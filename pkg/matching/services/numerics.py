"""
Log-domain numerical primitives.

Negative infinity is the canonical log of zero probability; every helper here
accepts it and returns it without producing NaN.
"""
import logging
import math
import threading
from typing import Callable, List

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp, xlog1py, xlogy

from matching.errors import DomainError, EmptyLogSumError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


def log_sum_exp(values: ArrayLike) -> float:
    """Return log(sum(exp(values))) without overflow or underflow."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyLogSumError()
    return float(logsumexp(arr))


def log_add(a: float, b: float) -> float:
    """Scalar two-term log-sum-exp."""
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class _LogTable:
    """Grow-only table of log values, extended on demand under a lock."""

    def __init__(
        self, name: str, initial: List[float], step: Callable[[List[float], int], float]
    ) -> None:
        self.name = name
        self._values = list(initial)
        self._step = step
        self._lock = threading.Lock()

    def _extend(self, n: int) -> None:
        if n < len(self._values):
            return
        with self._lock:
            start = len(self._values)
            while len(self._values) <= n:
                self._values.append(self._step(self._values, len(self._values)))
            logger.debug(f"{self.name} table extended from {start} to {len(self._values)} entries")

    def get(self, n: int) -> float:
        """Return the n-th entry."""
        self._extend(n)
        return self._values[n]

    def prefix(self, n: int) -> FloatArray:
        """Return entries 0..n as an array."""
        self._extend(n)
        return np.array(self._values[: n + 1], dtype=np.float64)


_log_factorials = _LogTable(
    "log-factorial", [0.0], lambda values, i: values[i - 1] + math.log(i)
)
# D(0) = 1, D(1) = 0, D(i) = (i - 1) * (D(i - 1) + D(i - 2))
_log_subfactorials = _LogTable(
    "log-subfactorial",
    [0.0, -math.inf],
    lambda values, i: math.log(i - 1) + log_add(values[i - 1], values[i - 2]),
)


def _check_count(name: str, n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {n!r}")
    if n < 0:
        raise DomainError(f"{name} must be non-negative, got {n}")


def log_factorial(n: int) -> float:
    """Return log(n!) by accumulating log i."""
    _check_count("n", n)
    return _log_factorials.get(int(n))


def log_factorials(n: int) -> FloatArray:
    """Return log(i!) for i = 0..n."""
    _check_count("n", n)
    return _log_factorials.prefix(int(n))


def log_subfactorial(n: int) -> float:
    """Return the log of the number of derangements of n items."""
    _check_count("n", n)
    return _log_subfactorials.get(int(n))


def check_probability(name: str, p: float) -> None:
    """Raise DomainError unless p lies in [0, 1]."""
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"{name} must be a probability in [0, 1], got {p}")


def log_binomial_terms(n: int, log_p: float, log_q: float) -> FloatArray:
    """
    Log binomial masses for l = 0..n given log(p) and log(1 - p).

    Uses the convention 0 * log(0) = 0 so the endpoints give exact point masses.
    """
    ell = np.arange(n + 1, dtype=np.float64)
    facts = log_factorials(n)
    log_comb = facts[n] - facts - facts[::-1]
    with np.errstate(invalid="ignore"):
        success = np.where(ell == 0, 0.0, ell * log_p)
        failure = np.where(ell == n, 0.0, (n - ell) * log_q)
    return np.asarray(log_comb + success + failure, dtype=np.float64)


def log_binomial_pmf_vector(n: int, theta: float) -> FloatArray:
    """Log Bin(l | n, theta) for l = 0..n."""
    _check_count("n", n)
    check_probability("theta", theta)
    log_p = math.log(theta) if theta > 0 else -math.inf
    log_q = math.log1p(-theta) if theta < 1 else -math.inf
    return log_binomial_terms(n, log_p, log_q)


def log_binomial_pmf(ell: int, n: int, theta: float) -> float:
    """Log Bin(ell | n, theta)."""
    _check_count("n", n)
    _check_count("ell", ell)
    if ell > n:
        raise DomainError(f"ell must not exceed n, got ell={ell}, n={n}")
    check_probability("theta", theta)
    return (
        log_factorial(n)
        - log_factorial(ell)
        - log_factorial(n - ell)
        + float(xlogy(ell, theta))
        + float(xlog1py(n - ell, -theta))
    )


def log_convolve(a: FloatArray, b: FloatArray) -> FloatArray:
    """Convolve two log-mass vectors over 0..len-1 supports, in log space."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    width = a.size + b.size - 1
    shifted = np.full((b.size, width), -np.inf)
    for j, log_bj in enumerate(b):
        if log_bj == -np.inf:
            continue
        shifted[j, j : j + a.size] = a + log_bj
    return np.asarray(logsumexp(shifted, axis=0), dtype=np.float64)


def log_upper_tails(log_pmf: FloatArray) -> FloatArray:
    """Entry t is log P(T >= t), summed from the top of the support."""
    return np.asarray(np.logaddexp.accumulate(log_pmf[::-1])[::-1], dtype=np.float64)


def log_lower_tails(log_pmf: FloatArray) -> FloatArray:
    """Entry t is log P(T <= t)."""
    return np.asarray(np.logaddexp.accumulate(log_pmf), dtype=np.float64)


def normalise(log_pmf: FloatArray) -> FloatArray:
    """Shift a log-mass vector so it sums to one."""
    return np.asarray(log_pmf - log_sum_exp(log_pmf), dtype=np.float64)
