"""
Pydantic models for distribution parameters and summaries.
"""
import math
from typing import List, Literal, Optional, Union
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from matching.errors import PointMassAtInfinityError

Size = Union[int, float]
"""A size parameter: a non-negative integer, or math.inf."""

DistributionMethod = Literal["exact", "normal-approx"]


def parse_size(value: object) -> Size:
    """Coerce a size given as int, integral float, 'inf' or math.inf."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in {"inf", "infinity", "∞"}:
            return math.inf
        value = int(text)
    if isinstance(value, bool):
        raise ValueError("size must be a non-negative integer or infinity")
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return math.inf
        if not value.is_integer():
            raise ValueError(f"size must be an integer or infinity, got {value}")
        value = int(value)
    if not isinstance(value, int) or value < 0:
        raise ValueError(f"size must be a non-negative integer or infinity, got {value!r}")
    return value


def is_infinite(size: Size) -> bool:
    """True when the size parameter is infinity."""
    return isinstance(size, float) and math.isinf(size)


class GMDParams(BaseModel):
    """Parameters identifying one generalised matching distribution."""

    model_config = ConfigDict(frozen=True)

    size: Size = Field(..., description="Number of items n (integer or infinity)")
    trials: int = Field(default=1, ge=1, description="Number of IID games m")
    prob: float = Field(default=0.0, ge=0.0, le=1.0, description="Matching probability theta")

    @field_validator("size", mode="before")
    @classmethod
    def validate_size(cls, v: object) -> Size:
        """Accept integers, integral floats and infinity."""
        return parse_size(v)

    @model_validator(mode="after")
    def reject_point_mass_at_infinity(self) -> "GMDParams":
        """Infinite size with positive probability has no proper distribution."""
        if is_infinite(self.size) and self.prob > 0:
            raise PointMassAtInfinityError()
        return self

    @property
    def is_infinite(self) -> bool:
        return is_infinite(self.size)

    @property
    def max_total(self) -> float:
        """Largest attainable total n * m."""
        if self.is_infinite:
            return math.inf
        return int(self.size) * self.trials


class Moments(BaseModel):
    """First four central moments; skewness and kurtosis are None for point masses."""

    model_config = ConfigDict(frozen=True)

    mean: float
    variance: float
    skewness: Optional[float] = None
    kurtosis: Optional[float] = None
    sd: Optional[float] = Field(default=None, description="Included only on request")


class HDRRegion(BaseModel):
    """Highest density region of a discrete distribution."""

    model_config = ConfigDict(frozen=True)

    params: GMDParams
    cover_prob: float = Field(..., gt=0.0, lt=1.0, description="Requested minimum coverage")
    points: List[int] = Field(..., min_length=1, description="Support points, ascending")
    coverage: float = Field(..., ge=0.0, le=1.0 + 1e-9, description="Attained coverage")
    contiguous: bool
    method: DistributionMethod = "exact"

    def label(self) -> str:
        """Render as runs, e.g. '1..7' or '0, 2..5'."""
        runs: List[str] = []
        start = prev = self.points[0]
        for point in self.points[1:]:
            if point == prev + 1:
                prev = point
                continue
            runs.append(_run_label(start, prev))
            start = prev = point
        runs.append(_run_label(start, prev))
        return ", ".join(runs)


def _run_label(start: int, stop: int) -> str:
    return str(start) if start == stop else f"{start}..{stop}"
