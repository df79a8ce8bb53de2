import math

import pytest
from hypothesis import settings

from vstates.contour import QuadratureGrid

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")

B4 = math.sqrt(math.sqrt(2.0) - 1.0)


@pytest.fixture(scope="session")
def grid():
    return QuadratureGrid(256)


ACCEPTANCE_LINES = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
