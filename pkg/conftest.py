# conftest.py - 공용 fixture 와 slow 마커
import numpy as np
import pytest

from models.schemas import CircularMapping, RngStream
from services import reset_services
from services.automaton_service import make_cerny, make_circular


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="slow 마커 테스트도 실행")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 수 분 걸리는 수용(acceptance) 실행")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="--runslow 옵션이 필요합니다")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_services():
    reset_services()
    yield
    reset_services()


@pytest.fixture
def cerny4():
    return make_cerny(4)


@pytest.fixture
def witness():
    """합성수 n=4 반례: 순열이 아니지만 동기화되지 않는 매핑"""
    return CircularMapping.of((0, 0, 2, 2))


@pytest.fixture
def witness_dfa(witness):
    return make_circular(witness)


@pytest.fixture
def seeded_mappings():
    def draw(n: int, count: int, seed: int = 7):
        return [
            CircularMapping.of(RngStream(master_seed=seed, trial_index=t).generator().integers(0, n, size=n))
            for t in range(count)
        ]
    return draw


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
