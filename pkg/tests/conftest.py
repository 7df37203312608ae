import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from danebench import Dataset, RidgeLoss, SyntheticSpec, generate_synthetic, partition

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_spec():
    return SyntheticSpec(d=20, n_total=1000, seed=3)


@pytest.fixture(scope="session")
def small_data(small_spec) -> Dataset:
    return generate_synthetic(small_spec)


@pytest.fixture(scope="session")
def small_shards(small_data):
    return partition(small_data, 4, 3)


@pytest.fixture
def ridge():
    return RidgeLoss(0.005)


def pytest_terminal_summary(terminalreporter):
    from _report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
