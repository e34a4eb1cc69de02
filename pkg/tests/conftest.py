import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))
sys.path.insert(0, str(TESTS / "fixtures"))

CORPUS = TESTS / "fixtures" / "corpus"
DEMO = TESTS / "fixtures" / "demo"


@pytest.fixture
def corpus_dir():
    return CORPUS


@pytest.fixture
def demo_dir():
    return DEMO


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
