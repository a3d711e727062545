import pytest

from fujita_lab import make_params
from fujita_lab import spectrum, steady


@pytest.fixture(scope="session")
def p12():
    return make_params(12, 5.0)


@pytest.fixture(scope="session")
def p6():
    return make_params(6, 5.0)


@pytest.fixture(scope="session")
def member_a2(p6):
    """The (N=6, p=5) bounded selfsimilar profile crossing the singular state twice."""
    res = steady.find_Ak(p6, 2, (1.1 * p6.kappa, 50 * p6.kappa))
    assert isinstance(res, steady.SteadyState), res
    return res


@pytest.fixture(scope="session")
def frame12(p12):
    return spectrum.build_frame(p12, jmax=5)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; returns the pass flag for the caller to assert."""

    def _report(number, title, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
