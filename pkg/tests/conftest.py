import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402


def _criterion_number(line):
    return int(line.split("criterion ")[1].split(":")[0])


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=_criterion_number):
            terminalreporter.write_line(line)
