import pytest

_LINES = []


@pytest.fixture
def report():
    """Collects one status line per acceptance criterion for the terminal summary."""

    def add(line):
        _LINES.append(line)
        print(line)

    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
