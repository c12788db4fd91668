import pytest

from fillflow.events import group_transactions
from fillflow.fixtures import fixture_fills, market_specs
from fillflow.synthetic import SyntheticScenario, generate_synthetic_ledger
from fillflow.units import parse_utc


@pytest.fixture(scope="session")
def markets():
    return market_specs()


@pytest.fixture(scope="session")
def example_fills():
    return fixture_fills()


@pytest.fixture(scope="session")
def example_transactions(example_fills):
    return group_transactions(example_fills)


@pytest.fixture(scope="session")
def small_ledger(markets):
    scenario = SyntheticScenario(
        seed=421,
        markets=markets[:2],
        start=parse_utc("2024-02-01T00:00:00Z"),
        end=parse_utc("2024-05-01T00:00:00Z"),
        n_transactions=1500,
    )
    return generate_synthetic_ledger(scenario)
