"""
Shared fixtures for the ReliaSpan test suite
"""

import pytest
from loguru import logger

from reliaspan.construction.spanner1d import Spanner1D, build_spanner


@pytest.fixture
def caplog(caplog):
    """Route loguru records into pytest's caplog"""
    handler_id = logger.add(caplog.handler, format="{message}", level=0)
    yield caplog
    logger.remove(handler_id)


@pytest.fixture(scope="session")
def sparse_spanner() -> Spanner1D:
    """n=64 with c=1: M=3, c(0..3) = 6, 8, 12, 16"""
    return build_spanner(64, 0.25, c_const=1.0, seed=11)


@pytest.fixture(scope="session")
def medium_spanner() -> Spanner1D:
    """n=64 with c=2: M=2, c(0..2) = 12, 16, 23"""
    return build_spanner(64, 0.25, c_const=2.0, seed=5)
