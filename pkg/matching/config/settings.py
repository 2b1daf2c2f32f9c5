"""
Library configuration using Pydantic BaseSettings.

Loads numerical tolerances, defaults and output options from the environment.
"""
from typing import Literal, Optional
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library settings with environment variable loading."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="MATCHING_",
        case_sensitive=False,
        extra="ignore",
    )

    # Distribution computation
    approx_trials_threshold: int = Field(
        default=100, ge=1, description="Trials above which the normal approximation is used"
    )
    poisson_truncation: int = Field(
        default=60, ge=10, le=1000, description="Upper support point for truncated Poisson(1) sums"
    )
    stirling_exact_limit: int = Field(
        default=20, ge=0, le=60, description="Largest order computed with exact integer Stirling numbers"
    )
    quantile_tol: float = Field(
        default=1e-12, ge=0.0, le=1e-6, description="Absolute slack when comparing CDF values to p"
    )

    # Inference
    conf_level: float = Field(
        default=0.95, gt=0.0, lt=1.0, description="Default confidence level"
    )
    bootstrap_sims: int = Field(
        default=1000, ge=1, description="Default number of bootstrap resamples"
    )
    mle_max_iter: int = Field(default=200, ge=1, description="Newton iteration cap")
    mle_score_tol: float = Field(
        default=1e-10, gt=0.0, description="Convergence tolerance on the summed score"
    )
    mle_step_tol: float = Field(
        default=1e-12, gt=0.0, description="Convergence tolerance on the Newton step"
    )
    mom_tol: float = Field(default=1e-12, gt=0.0, description="MOM root tolerance")

    # Hypothesis testing
    two_sided_rel_tol: float = Field(
        default=1e-12, ge=0.0, le=1e-6, description="Relative tie tolerance for two-sided p-values"
    )

    # Oracle
    enumeration_limit: int = Field(
        default=9, ge=0, le=10, description="Largest size enumerated by brute force"
    )

    # Output
    output_format: Literal["csv", "json"] = Field(
        default="csv", description="Default CLI output format"
    )
    csv_significant_digits: int = Field(
        default=15, ge=1, le=17, description="Significant digits for CSV floats"
    )
    default_seed: Optional[int] = Field(
        default=None, ge=0, description="Seed used when the caller gives none"
    )

    # Application
    app_name: str = Field(default="Generalised Matching Distribution", description="Application name")
    app_version: str = Field(default="0.1.0", description="Application version")
    log_level: str = Field(default="WARNING", description="Logging level")
    debug: bool = Field(default=False, description="Debug mode")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate and normalise the logging level name."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(
                "MATCHING_LOG_LEVEL must be one of DEBUG, INFO, WARNING, ERROR, CRITICAL"
            )
        return level

    @field_validator("output_format", mode="before")
    @classmethod
    def normalise_output_format(cls, v: object) -> object:
        """Accept output format names in any case."""
        return v.lower() if isinstance(v, str) else v


# Global settings instance
settings = Settings()
