from functools import lru_cache

import pytest

from pencilstab.verify import model_instance


@lru_cache(maxsize=None)
def instance(model, c, p=2, n_points=None):
    """Profile, operator and spectral report, cached across the test session."""
    return model_instance(model, c, p, n_points=n_points)


@pytest.fixture(scope="session")
def bous_unstable():
    return instance("boussinesq", 0.3, 2)


@pytest.fixture(scope="session")
def bous_stable():
    return instance("boussinesq", 0.7, 2)


@pytest.fixture(scope="session")
def kgz_half():
    return instance("kgz", 0.5, 3)


@pytest.fixture(scope="session")
def beam_one():
    return instance("beam", 1.0, 3)


ACCEPTANCE_LINES = []


def report_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
