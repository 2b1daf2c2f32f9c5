"""
Exception hierarchy for the matching library.

Every error raised for invalid arguments or degenerate inputs derives from
MatchingError, which is a ValueError so callers can treat it as one.
"""
from typing import Optional


class MatchingError(ValueError):
    """Base class for library errors."""


class DomainError(MatchingError):
    """Argument outside the domain of the operation."""


class EmptyLogSumError(MatchingError):
    """Log-sum-exp of an empty sequence."""

    def __init__(self) -> None:
        super().__init__("empty log-sum")


class PointMassAtInfinityError(MatchingError):
    """Infinite size with positive matching probability."""

    def __init__(self) -> None:
        super().__init__(
            "Distribution is a point-mass on infinity (size is infinite and prob > 0)"
        )


class BoundaryError(MatchingError):
    """Operation undefined at the boundary of the parameter space."""


class ConvergenceError(MatchingError):
    """Iterative solver failed to converge."""

    def __init__(self, message: str, last_phi: float, last_score: float) -> None:
        super().__init__(f"{message} (last phi={last_phi!r}, score={last_score!r})")
        self.last_phi = last_phi
        self.last_score = last_score


class DegenerateNullError(MatchingError):
    """Null hypothesis with prob = 1 has a point-mass null distribution."""

    def __init__(self, null_prob: Optional[float] = None) -> None:
        super().__init__(
            f"null probability {null_prob} gives a degenerate null distribution; use null_prob < 1"
        )


class MOMUndefinedError(MatchingError):
    """Method-of-moments estimator does not exist for this size."""

    def __init__(self, size: int) -> None:
        super().__init__(f"MOM undefined for size {size}; the size must be greater than one")


class OracleCostError(MatchingError):
    """Brute-force enumeration refused for a size above the cost guard."""
