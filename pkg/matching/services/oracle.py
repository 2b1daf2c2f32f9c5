"""
Ground-truth generators for the matching distributions.

Brute-force enumeration of permutations with exact rational frequencies, and a
direct simulation of the two-step game. Nothing here shares code with the
recursive production path.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import List, Sequence, Tuple, TypeVar

import numpy as np
from numpy.typing import NDArray

from matching.config.settings import settings
from matching.errors import DomainError, OracleCostError

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class ExactDistribution:
    """Exact rational masses over the support 0..size."""

    probabilities: Tuple[Fraction, ...]

    @property
    def size(self) -> int:
        return len(self.probabilities) - 1

    @property
    def total(self) -> Fraction:
        return sum(self.probabilities, Fraction(0))

    def as_floats(self) -> NDArray[np.float64]:
        return np.array([float(p) for p in self.probabilities], dtype=np.float64)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Simulated totals and their relative frequencies over 0..max_total."""

    totals: NDArray[np.int64]
    max_total: int

    def counts(self) -> NDArray[np.int64]:
        return np.bincount(self.totals, minlength=self.max_total + 1).astype(np.int64)

    def frequencies(self) -> NDArray[np.float64]:
        return self.counts() / max(self.totals.size, 1)


def _check_enumerable(n: int) -> None:
    if n < 0:
        raise DomainError(f"size must be non-negative, got {n}")
    if n > settings.enumeration_limit:
        raise OracleCostError(
            f"enumerating {n}! permutations exceeds the limit of size {settings.enumeration_limit}"
        )


@lru_cache(maxsize=None)
def _fixed_point_counts(n: int) -> Tuple[int, ...]:
    counts = [0] * (n + 1)
    for perm in permutations(range(n)):
        counts[sum(1 for i, x in enumerate(perm) if i == x)] += 1
    logger.debug(f"Enumerated {math.factorial(n)} permutations of size {n}")
    return tuple(counts)


def shuffle(items: Sequence[T], rng: np.random.Generator) -> List[T]:
    """Fisher-Yates shuffle drawing swap positions from rng."""
    result = list(items)
    for i in range(len(result) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        result[i], result[j] = result[j], result[i]
    return result


def simulate_totals(
    n: int, theta: float, m: int, reps: int, rng: np.random.Generator
) -> NDArray[np.int64]:
    """
    Play the two-step game reps times and return the total matches of each rep.

    Each item is known with probability theta; unknown items are shuffled among
    the unknown positions and count when they land on their own position.
    """
    if n < 0 or m < 1 or reps < 0:
        raise DomainError(f"invalid simulation arguments n={n}, m={m}, reps={reps}")
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must be a probability in [0, 1], got {theta}")
    totals = np.zeros(reps, dtype=np.int64)
    for rep in range(reps):
        total = 0
        for _ in range(m):
            known = rng.random(n) < theta
            unknown = np.flatnonzero(~known)
            placed = np.asarray(shuffle(unknown.tolist(), rng), dtype=np.int64)
            total += int(np.count_nonzero(known)) + int(np.count_nonzero(placed == unknown))
        totals[rep] = total
    return totals


class MatchingOracle:
    """Naive reference implementations used by tests and diagnostics."""

    def enumerate_classical(self, n: int) -> ExactDistribution:
        """Fixed-point frequencies over all n! permutations."""
        _check_enumerable(n)
        denominator = math.factorial(n)
        return ExactDistribution(
            tuple(Fraction(c, denominator) for c in _fixed_point_counts(n))
        )

    def enumerate_generalised(self, n: int, theta: float) -> ExactDistribution:
        """Exact mixture over the number of known items, using the exact binary value of theta."""
        _check_enumerable(n)
        if not 0.0 <= theta <= 1.0:
            raise DomainError(f"theta must be a probability in [0, 1], got {theta}")
        p = Fraction(theta)
        probs = [Fraction(0)] * (n + 1)
        for ell in range(n + 1):
            weight = math.comb(n, ell) * p**ell * (1 - p) ** (n - ell)
            if weight == 0:
                continue
            for j, mass in enumerate(self.enumerate_classical(n - ell).probabilities):
                probs[ell + j] += weight * mass
        return ExactDistribution(tuple(probs))

    def simulate_two_step(
        self, n: int, theta: float, m: int, reps: int, rng: np.random.Generator
    ) -> EmpiricalDistribution:
        """Empirical distribution of simulated totals over m games."""
        if reps < 1:
            raise DomainError(f"reps must be at least 1, got {reps}")
        totals = simulate_totals(n, theta, m, reps, rng)
        return EmpiricalDistribution(totals=totals, max_total=n * m)


# Global oracle instance
matching_oracle = MatchingOracle()
