import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import _acceptance  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    rows = _acceptance.lines()
    if rows:
        terminalreporter.section("acceptance criteria")
        for row in rows:
            terminalreporter.write_line(row)
