"""Session-scoped enumerations shared across test modules."""

from __future__ import annotations

import pytest

from trirecom import build_region, build_state_graph, enumerate_omega


@pytest.fixture(scope="session")
def region5():
    return build_region(5)


@pytest.fixture(scope="session")
def omega5(region5):
    """All n=5, k=(5,5,5), slack-1 window states."""
    return enumerate_omega(region5, (5, 5, 5), slack=1)


@pytest.fixture(scope="session")
def graph5(omega5):
    return build_state_graph(omega5)


@pytest.fixture(scope="session")
def omega3_exact():
    return enumerate_omega(build_region(3), (2, 2, 2), slack=0)


@pytest.fixture(scope="session")
def omega3_relaxed():
    return enumerate_omega(build_region(3), (2, 2, 2), slack=1)
