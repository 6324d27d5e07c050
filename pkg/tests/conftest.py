import numpy as np
import pytest

from aimarket.config import MarketConfig, small_market


@pytest.fixture(scope="session")
def paper_market():
    return MarketConfig()


@pytest.fixture(scope="session")
def tiny_market():
    return small_market()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


CRITERIA: dict = {}


@pytest.fixture(scope="session")
def criterion():
    """Record ``criterion(number, ok, detail)``; printed in the terminal summary."""

    def record(number, ok, detail=""):
        CRITERIA[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
