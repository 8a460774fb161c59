from __future__ import annotations

import sys
from pathlib import Path

import pytest
from mpmath import mp

sys.path.insert(0, str(Path(__file__).parent))

# PASS/FAIL lines recorded by the acceptance tests, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(autouse=True)
def _test_precision():
    # test-side arithmetic runs well above the 256-bit outputs it inspects
    with mp.workprec(320):
        yield


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
