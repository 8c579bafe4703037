import pytest

_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collector for one measured PASS/FAIL line per acceptance criterion;
    the lines are echoed in the terminal summary, outside stdout capture."""
    return _LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
