"""
Classical matching distribution service.

Computes the distribution of fixed points of a uniformly random permutation,
its moments and generating function, working in log space throughout.
"""
import logging
import math
import threading
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import stats

from matching.config.settings import settings
from matching.errors import DomainError
from matching.models.distribution import Moments, Size, is_infinite
from matching.services.numerics import FloatArray, log_add, log_factorial, normalise

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassicalTable:
    """Log-masses of the classical matching distribution for every size 0..max_size."""

    max_size: int
    rows: Tuple[FloatArray, ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            row.flags.writeable = False

    def row(self, size: int) -> FloatArray:
        """Log-masses over k = 0..size."""
        if not 0 <= size <= self.max_size:
            raise DomainError(f"size {size} outside table range 0..{self.max_size}")
        return self.rows[size]

    def log_pmf(self, k: int, size: int) -> float:
        """log Match(k | size); -inf outside the support."""
        if not 0 <= k <= size:
            return -math.inf
        return float(self.row(size)[k])

    def pmf(self, k: int, size: int) -> float:
        return math.exp(self.log_pmf(k, size))


def recursive_log_row(size: int) -> FloatArray:
    """
    Log-masses for one size by the downward recursion on k.

    m(size) = -log(size!) and
    m(k) = log(k+1) - log(size-k) + logsumexp(log(size-k-1) + m(k+1), log(k+2) + m(k+2)).
    """
    row = np.full(size + 1, -np.inf)
    row[size] = -log_factorial(size)
    for k in range(size - 1, -1, -1):
        term1 = math.log(size - k - 1) + row[k + 1] if size - k - 1 > 0 else -math.inf
        term2 = math.log(k + 2) + row[k + 2] if k < size - 1 else -math.inf
        row[k] = math.log(k + 1) - math.log(size - k) + log_add(term1, term2)
    return normalise(row)


def stirling_second_kind(r: int) -> List[Union[int, float]]:
    """Stirling numbers S(r, i) for i = 0..r from the triangle recurrence."""
    exact = r <= settings.stirling_exact_limit
    row: List[Union[int, float]] = [1 if exact else 1.0]
    for j in range(1, r + 1):
        new_row: List[Union[int, float]] = [0 if exact else 0.0] * (j + 1)
        for i in range(1, j + 1):
            above = row[i] if i < j else 0
            new_row[i] = i * above + row[i - 1]
        row = new_row
    return row


class ClassicalMatchingService:
    """Service for the classical matching distribution Match(k | n)."""

    def __init__(self) -> None:
        """Initialize with an empty table cache."""
        self._table: Optional[ClassicalTable] = None
        self._lock = threading.Lock()

    def build_classical_table(self, n: int) -> ClassicalTable:
        """Build a fresh table of all sizes 0..n."""
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise DomainError(f"table size must be a non-negative integer, got {n!r}")
        return ClassicalTable(max_size=n, rows=tuple(recursive_log_row(s) for s in range(n + 1)))

    def table(self, n: int) -> ClassicalTable:
        """Cached table covering at least sizes 0..n, grown on demand."""
        cached = self._table
        if cached is not None and cached.max_size >= n:
            return cached
        with self._lock:
            cached = self._table
            if cached is not None and cached.max_size >= n:
                return cached
            rows = list(cached.rows) if cached is not None else []
            start = len(rows)
            rows.extend(recursive_log_row(s) for s in range(start, n + 1))
            self._table = ClassicalTable(max_size=n, rows=tuple(rows))
            logger.debug(f"Classical table grown from {start} to {n + 1} rows")
            return self._table

    def classical_log_pmf(self, k: int, n: Size) -> float:
        """log Match(k | n), with Match(k | inf) = Pois(k | 1)."""
        if k < 0:
            return -math.inf
        if is_infinite(n):
            return float(stats.poisson.logpmf(k, 1.0))
        return self.table(int(n)).log_pmf(k, int(n))

    def classical_pmf_explicit(self, k: int, n: Size) -> float:
        """Alternating-sum form of Match(k | n); a cross-check, not the production path."""
        if k < 0:
            raise DomainError(f"k must be non-negative, got {k}")
        if is_infinite(n):
            return math.exp(-1.0) / math.factorial(k)
        if k > n:
            raise DomainError(f"k={k} outside the support 0..{n}")
        total = sum((-1) ** i / math.factorial(i) for i in range(int(n) - k + 1))
        return total / math.factorial(k)

    def classical_raw_moment(self, r: int, n: Size) -> float:
        """E(K^r) as a partial sum of Stirling numbers; the Bell number when r <= n."""
        if r < 0:
            raise DomainError(f"moment order must be non-negative, got {r}")
        upper = r if is_infinite(n) else min(r, int(n))
        return float(sum(stirling_second_kind(r)[: upper + 1]))

    def classical_central_moments(self, n: Size) -> Moments:
        """Mean, variance, skewness and kurtosis; skewness and kurtosis undefined for n <= 1."""
        if is_infinite(n) or n >= 4:
            return Moments(mean=1.0, variance=1.0, skewness=1.0, kurtosis=4.0)
        if n == 0:
            return Moments(mean=0.0, variance=0.0)
        if n == 1:
            return Moments(mean=1.0, variance=0.0)
        if n == 2:
            return Moments(mean=1.0, variance=1.0, skewness=0.0, kurtosis=1.0)
        return Moments(mean=1.0, variance=1.0, skewness=1.0, kurtosis=3.0)

    def classical_mgf(self, t: float, n: Size) -> float:
        """Sum over i = 0..n of (e^t - 1)^i / i!."""
        base = math.expm1(t)
        if is_infinite(n):
            return math.exp(base)
        total = 0.0
        term = 1.0
        for i in range(int(n) + 1):
            if i > 0:
                term *= base / i
            total += term
        return total

    def classical_size_recursion_check(self, k: int, n: int) -> float:
        """Absolute residual of Match(k|n+1) against its expression in Match(.|n)."""
        if not 0 <= k <= n:
            raise DomainError(f"k={k} outside 0..{n}")
        table = self.table(n + 1)
        lhs = table.pmf(k, n + 1)
        rhs = (n - k) / (n - k + 1) * table.pmf(k, n) + (k + 1) / (n - k + 1) * table.pmf(k + 1, n)
        return abs(lhs - rhs)

    def poisson_sse(self, n: int, cutoff: Optional[int] = None) -> float:
        """Squared distance between Match(.|n) and Pois(.|1), truncated at cutoff."""
        cutoff = max(cutoff if cutoff is not None else settings.poisson_truncation, n)
        k = np.arange(cutoff + 1)
        match = np.zeros(cutoff + 1)
        match[: n + 1] = np.exp(self.table(n).row(n))
        return float(np.sum((match - stats.poisson.pmf(k, 1.0)) ** 2))


# Global classical matching service instance
classical_service = ClassicalMatchingService()
