import numpy as np
import pytest

from lib.braids import BraidWord
from lib.config import RunConfig
from lib.reference import published_tables
from lib.tables import TableService


def random_word(rng: np.random.Generator, n: int, length: int) -> BraidWord:
    letters = tuple(
        (int(rng.integers(1, n)), 1 if rng.random() < 0.5 else -1) for _ in range(length)
    )
    return BraidWord(n, letters)


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture(scope="session")
def n2_tables():
    return published_tables(2)


@pytest.fixture(scope="session")
def n3_tables():
    return published_tables(3)


@pytest.fixture(scope="session")
def n2_service():
    return TableService(RunConfig(n=2))


@pytest.fixture(scope="session")
def n3_service():
    return TableService(RunConfig(n=3))
