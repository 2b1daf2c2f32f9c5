"""
Pydantic model for CLI output records.
"""
from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class OutputRecord(BaseModel):
    """One command's result: echo, parameters, a table of rows and method flags."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    columns: List[str]
    rows: List[List[Any]] = Field(default_factory=list)
    flags: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_row_width(self) -> "OutputRecord":
        """Every row has one value per column."""
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"row {row!r} has {len(row)} values for {width} columns")
        return self
