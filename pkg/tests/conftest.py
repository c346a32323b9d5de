import os
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"
FIXTURE_CSV = DATA_DIR / "autobi_fixture.csv"

ACCEPTANCE_LINES = []


def autobi_path():
    """The real AutoBI file, if the user has supplied one."""
    raw = os.environ.get("CLAIMPI_AUTOBI")
    candidates = [Path(raw)] if raw else []
    candidates.append(DATA_DIR / "AutoBI.csv")
    for path in candidates:
        if path.is_file():
            return path
    return None


@pytest.fixture
def fixture_csv():
    return FIXTURE_CSV


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
