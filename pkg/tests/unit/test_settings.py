"""
Unit tests for library settings.
"""
import pytest
from pydantic import ValidationError

from matching.config.settings import Settings


class TestSettings:
    """Test defaults and environment loading."""

    def test_defaults(self, monkeypatch):
        """Defaults without an environment or .env file."""
        monkeypatch.delenv("MATCHING_LOG_LEVEL", raising=False)
        config = Settings(_env_file=None)
        assert config.approx_trials_threshold == 100
        assert config.conf_level == 0.95
        assert config.enumeration_limit == 9
        assert config.output_format == "csv"
        assert config.log_level == "WARNING"

    def test_environment_override(self, monkeypatch):
        """MATCHING_ variables override defaults and are normalised."""
        monkeypatch.setenv("MATCHING_BOOTSTRAP_SIMS", "250")
        monkeypatch.setenv("MATCHING_OUTPUT_FORMAT", "JSON")
        monkeypatch.setenv("MATCHING_LOG_LEVEL", "debug")
        config = Settings(_env_file=None)
        assert config.bootstrap_sims == 250
        assert config.output_format == "json"
        assert config.log_level == "DEBUG"

    def test_invalid_log_level(self):
        """An unknown log level names the variable in the error."""
        with pytest.raises(ValidationError, match="MATCHING_LOG_LEVEL"):
            Settings(_env_file=None, log_level="chatty")

    @pytest.mark.parametrize(
        "field, value", [("conf_level", 1.0), ("enumeration_limit", 11), ("poisson_truncation", 5)]
    )
    def test_out_of_range(self, field, value):
        """Out-of-range tolerances and limits are rejected."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, **{field: value})
