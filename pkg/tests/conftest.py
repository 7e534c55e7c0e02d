import pytest

from census import counting
from census.groups.fuchsian import gamma2

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record an acceptance outcome; the terminal summary prints one line per criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        _CRITERIA[number] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}")


@pytest.fixture(scope="session")
def g2():
    return gamma2()


@pytest.fixture(scope="session")
def ab_run(g2):
    """Loxodromic class AB counted to t = 20 with both engines and directions."""
    (direct, sample), geo = counting.count_both(g2, "A*B", 20.0, 0.5, directions=True)
    return direct, geo, sample


@pytest.fixture(scope="session")
def a_run(g2):
    """Parabolic class A counted to t = 20 with both engines."""
    return counting.count_both(g2, "A", 20.0, 0.5)
