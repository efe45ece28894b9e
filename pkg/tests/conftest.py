import hypothesis
import numpy as np
import pytest

from ergolab.circle_map import make_map

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def doubling():
    return make_map("linear", 2)


@pytest.fixture(scope="session")
def tripling():
    return make_map("linear", 3)


@pytest.fixture(scope="session")
def smooth():
    return make_map("smooth_perturbed", 2, 0.1)


@pytest.fixture(scope="session")
def nonhoelder():
    return make_map("nonhoelder", 2, 0.05)


@pytest.fixture(scope="session")
def all_maps(doubling, tripling, smooth, nonhoelder):
    return [doubling, tripling, smooth, nonhoelder, make_map("smooth_perturbed", 3, 0.5),
            make_map("nonhoelder", 3, 1.0)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
