import mpmath
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

mpmath.mp.dps = 30


@pytest.fixture(scope="session")
def bump_spec():
    from critscat.potentials import preset

    return preset("compact-bump")


@pytest.fixture(scope="session")
def zero_spec():
    from critscat.potentials import preset

    return preset("zero")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split()[0])):
            terminalreporter.write_line(line)
