import pytest

from netauction.network import apply_reports, truthful_profile
from netauction.verification import fixtures

ACCEPTANCE_RESULTS = {}


def truthful_eff(net):
    return apply_reports(net, truthful_profile(net))


@pytest.fixture
def fig1a():
    return fixtures.figure1a()


@pytest.fixture
def fig1b():
    return fixtures.figure1b()


@pytest.fixture
def fig1a_be():
    return fixtures.figure1a_with_be()


@pytest.fixture
def line():
    return fixtures.line_network()


@pytest.fixture
def two_buyers():
    return fixtures.two_buyers()


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(ACCEPTANCE_RESULTS.items()):
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
