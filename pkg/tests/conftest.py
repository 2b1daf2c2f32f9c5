"""
Pytest fixtures for testing.

Provides service instances, seeded generators and reference datasets.
"""
from pathlib import Path
from typing import Tuple

import numpy as np
import pytest

from matching.models.inference import Dataset
from matching.services.classical import ClassicalMatchingService
from matching.services.generalised import GeneralisedMatchingService
from matching.services.hypothesis import MatchingTestService
from matching.services.inference import InferenceService
from matching.services.oracle import MatchingOracle

# 40 games with 16 items, 65 matches in total (mean 1.625)
REFERENCE_COUNTS: Tuple[int, ...] = (0,) * 4 + (1,) * 15 + (2,) * 15 + (3,) * 5 + (5,)

# 40 games with 16 items, mean 1.05
LOW_MATCH_COUNTS: Tuple[int, ...] = (0,) * 15 + (1,) * 15 + (2,) * 5 + (3,) * 3 + (4,) * 2

# 100 games with 2 items: 49 full matches, 51 misses
TWO_ITEM_COUNTS: Tuple[int, ...] = (2,) * 49 + (0,) * 51


@pytest.fixture(scope="session")
def classical() -> ClassicalMatchingService:
    """Classical service shared across the session so its table is built once."""
    return ClassicalMatchingService()


@pytest.fixture(scope="session")
def generalised(classical: ClassicalMatchingService) -> GeneralisedMatchingService:
    return GeneralisedMatchingService(classical)


@pytest.fixture(scope="session")
def inference(classical: ClassicalMatchingService) -> InferenceService:
    return InferenceService(classical)


@pytest.fixture(scope="session")
def tests_service(generalised: GeneralisedMatchingService) -> MatchingTestService:
    return MatchingTestService(generalised)


@pytest.fixture(scope="session")
def oracle() -> MatchingOracle:
    return MatchingOracle()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; a fresh one per test."""
    return np.random.default_rng(20240517)


@pytest.fixture
def reference_data() -> Dataset:
    return Dataset(size=16, observations=REFERENCE_COUNTS)


@pytest.fixture
def low_match_data() -> Dataset:
    return Dataset(size=16, observations=LOW_MATCH_COUNTS)


@pytest.fixture
def two_item_data() -> Dataset:
    return Dataset(size=2, observations=TWO_ITEM_COUNTS)


@pytest.fixture
def reference_file(tmp_path: Path) -> Path:
    """Reference counts written one per line, with a comment and a blank line."""
    path = tmp_path / "matches.txt"
    lines = ["# matches per game"] + [str(k) for k in REFERENCE_COUNTS] + [""]
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


@pytest.fixture
def two_item_file(tmp_path: Path) -> Path:
    path = tmp_path / "two_items.txt"
    path.write_text("\n".join(str(k) for k in TWO_ITEM_COUNTS) + "\n", encoding="utf-8")
    return path
