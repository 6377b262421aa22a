import pytest

from monosgt.smallgain import lookup

ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def sec5_z():
    return lookup("sec5-z")


@pytest.fixture(scope="session")
def sec5_x():
    return lookup("sec5-x")


@pytest.fixture(scope="session")
def k2():
    return lookup("k2")


@pytest.fixture(scope="session")
def loop_map():
    return lookup("k2-k1")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
