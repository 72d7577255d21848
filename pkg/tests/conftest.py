import json
from pathlib import Path

import pytest

ORACLES = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def oracle():
    return ORACLES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
