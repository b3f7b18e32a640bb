import random

import pytest

from jetsym import catalog as cat
from jetsym import detsolve


@pytest.fixture(scope="session")
def eh_basis():
    return detsolve.solve_symmetries(cat.catalog("eh-transport"), 2, 2)


@pytest.fixture(scope="session")
def ce_basis():
    return detsolve.solve_symmetries(cat.catalog("complex-euler-real"), 2, 2)


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
