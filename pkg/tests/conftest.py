import pytest

from annulus_dirichlet.closedform import ProblemSpec

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


@pytest.fixture
def critical():
    return ProblemSpec(2.0, 2.125, 2)


@pytest.fixture
def below():
    return ProblemSpec(4.0, 2.125, 2)


@pytest.fixture
def conformal():
    return ProblemSpec(2.0, 4.0, 2)


@pytest.fixture
def elastic():
    return ProblemSpec(1.5, 3.0, 2)


@pytest.fixture
def nonelastic():
    return ProblemSpec(2.0, 2.5, 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
