"""
Pydantic models for observed data and estimation results.
"""
from pathlib import Path
from typing import Literal, Optional, Tuple, Union
from pydantic import BaseModel, ConfigDict, Field, model_validator

from matching.errors import DomainError

CIMethod = Literal["asymptotic", "bootstrap"]
BoundaryFlag = Literal["none", "at-zero", "at-one"]
TailSplit = Literal["fractional", "absolute"]


class Dataset(BaseModel):
    """Match counts from m IID games played with n items."""

    model_config = ConfigDict(frozen=True)

    size: int = Field(..., ge=1, description="Number of items n, the same in every game")
    observations: Tuple[int, ...] = Field(..., min_length=1, description="Match counts k_i")

    @model_validator(mode="after")
    def validate_support(self) -> "Dataset":
        """Every count lies in 0..n and none equals n - 1."""
        for k in self.observations:
            if not 0 <= k <= self.size:
                raise ValueError(f"observation {k} outside 0..{self.size}")
            if k == self.size - 1:
                raise ValueError(
                    f"observation {k} is impossible: cannot match all but one of {self.size} items"
                )
        return self

    @property
    def trials(self) -> int:
        return len(self.observations)

    @property
    def total(self) -> int:
        return sum(self.observations)

    @property
    def mean(self) -> float:
        return self.total / self.trials

    @classmethod
    def from_file(cls, path: Union[str, Path], size: int) -> "Dataset":
        """Read one integer per line; blank lines and '#' comments are skipped."""
        observations = []
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                observations.append(int(text))
            except ValueError:
                raise DomainError(f"{path}:{line_no}: expected an integer, got {text!r}") from None
        return cls(size=size, observations=tuple(observations))


class MLEResult(BaseModel):
    """Maximum likelihood estimate of the matching probability."""

    model_config = ConfigDict(frozen=True)

    size: int
    trials: int
    theta_hat: float = Field(..., ge=0.0, le=1.0)
    phi_hat: float = Field(..., description="Half-logit of theta_hat; infinite on the boundary")
    max_loglik: float
    likelihood_per_point: float = Field(
        ..., description="Maximised geometric-mean likelihood per observation"
    )
    iterations: int = 0
    boundary_flag: BoundaryFlag = "none"
    ci: Optional[Tuple[float, float]] = None
    ci_method: Optional[CIMethod] = None
    conf_level: Optional[float] = Field(default=None, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def validate_interval(self) -> "MLEResult":
        """The interval brackets the estimate inside [0, 1]."""
        if self.ci is not None:
            lower, upper = self.ci
            if not 0.0 <= lower <= upper <= 1.0:
                raise ValueError(f"interval {self.ci} is not inside [0, 1]")
            if not lower - 1e-12 <= self.theta_hat <= upper + 1e-12:
                raise ValueError(f"interval {self.ci} does not contain {self.theta_hat}")
        return self
