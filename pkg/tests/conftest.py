import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _report import LINES  # noqa: E402
from pufclone.quantum import SeededRng  # noqa: E402


@pytest.fixture
def rng():
    return SeededRng(20240611)


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line[1])
