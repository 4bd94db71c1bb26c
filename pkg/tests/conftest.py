import numpy as np
import pytest

from noisyrcs import generate_random_circuit, simulate


@pytest.fixture(scope="session")
def circuit12():
    return generate_random_circuit(12, 14, 7)


@pytest.fixture(scope="session")
def dist12(circuit12):
    return simulate(circuit12)


@pytest.fixture(scope="session")
def dist8():
    return simulate(generate_random_circuit(8, 14, 3))


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
