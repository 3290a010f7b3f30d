from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

GROUND_TRUTH_DIR = TESTS_DIR / "fixtures" / "ground_truth"


@pytest.fixture(scope="session")
def ground_truth_dir() -> Path:
    return GROUND_TRUTH_DIR


@pytest.fixture(scope="session")
def fixture_source():
    def load(name: str) -> str:
        return (GROUND_TRUTH_DIR / name).read_text(encoding="utf-8")

    return load
