import pytest

from tfqkd.config import RunConfig
from tfqkd.model import SourceSpec


@pytest.fixture
def source():
    return SourceSpec()


@pytest.fixture
def config():
    return RunConfig()


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[key])
