"""
Pydantic models for matching tests and power analysis.
"""
from typing import ClassVar, List, Literal
from pydantic import BaseModel, ConfigDict, Field, model_validator

Alternative = Literal["greater", "less", "two-sided"]
TestMethod = Literal["exact", "normal-approx", "exact-binomial"]


class TestResult(BaseModel):
    """Outcome of a matching test on the total number of matches."""

    __test__: ClassVar[bool] = False
    model_config = ConfigDict(frozen=True)

    size: int
    trials: int
    observed_total: int = Field(..., ge=0)
    mean_matches: float
    null_prob: float = Field(..., ge=0.0, lt=1.0)
    alternative: Alternative = "greater"
    p_value: float = Field(..., ge=0.0, le=1.0)
    method: TestMethod = "exact"


class PowerPoint(BaseModel):
    """Power at one value of the matching probability."""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(..., ge=0.0, le=1.0)
    power: float = Field(..., ge=0.0, le=1.0)


class PowerCurve(BaseModel):
    """Power of the canonical matching test over a grid of probabilities."""

    model_config = ConfigDict(frozen=True)

    size: int
    trials: int
    alpha: float = Field(..., gt=0.0, lt=1.0)
    t_star: int = Field(..., ge=0, description="Lower bound of the rejection region")
    points: List[PowerPoint]

    @property
    def rejection_region_empty(self) -> bool:
        return self.t_star == self.size * self.trials + 1

    @model_validator(mode="after")
    def validate_t_star(self) -> "PowerCurve":
        """The critical value lies in 0..nm+1."""
        if self.t_star > self.size * self.trials + 1:
            raise ValueError(f"t_star {self.t_star} exceeds nm + 1")
        return self
