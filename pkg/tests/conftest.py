import pytest

from exchange_clear import Allocation, fixture


@pytest.fixture(scope="session")
def example1():
    return fixture("example1")


@pytest.fixture(scope="session")
def theorem5():
    return fixture("theorem5")


@pytest.fixture(scope="session")
def example1_all_satisfying():
    # the allocation satisfying all three agents of the example1 market
    return Allocation(
        {"p": "1", "c1": "1", "c2": "1", "c3": "1", "s": "2", "h": "2", "c4": "3"}
    )
