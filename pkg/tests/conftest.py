import pytest

from alpsense import default_config

CRITERIA_LINES = []


@pytest.fixture(scope="session")
def cfg():
    return default_config()


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
