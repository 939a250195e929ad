import asyncio
from pathlib import Path

import pytest

from config_manager import config_manager
from problem_manager import load_problem

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_problem(name: str, seed=None):
    return asyncio.run(load_problem(FIXTURES / f"{name}.ed", seed))


@pytest.fixture
def circle():
    return fixture_problem("circle")


@pytest.fixture(autouse=True)
def fresh_cache():
    yield
    config_manager.clear_cache()
