# tests/conftest.py
import os
import random
from pathlib import Path

import pytest

from src.solver.game_io import load_game

FIXTURES = Path(__file__).parent / "fixtures"
SLOW = os.getenv("NASH_SLOW") == "1"


def property_cases(default: int, slow: int) -> int:
    """Case count for randomised suites; NASH_PROPERTY_CASES overrides both."""
    raw = os.getenv("NASH_PROPERTY_CASES")
    if raw:
        return int(raw)
    return slow if SLOW else default


def pytest_collection_modifyitems(config, items):
    if SLOW:
        return
    skip = pytest.mark.skip(reason="set NASH_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return random.Random(20251019)


@pytest.fixture
def fixture_path():
    return lambda name: str(FIXTURES / name)


@pytest.fixture
def one_state():
    return load_game(str(FIXTURES / "one_state.json"))


@pytest.fixture
def penny_reach():
    return load_game(str(FIXTURES / "penny_reach.json"))


@pytest.fixture
def penny_parity():
    return load_game(str(FIXTURES / "penny_parity.json"))


@pytest.fixture
def turn_based_parity():
    return load_game(str(FIXTURES / "turn_based_parity.json"))


@pytest.fixture
def buchi_ranks():
    return load_game(str(FIXTURES / "buchi_ranks.json"))
