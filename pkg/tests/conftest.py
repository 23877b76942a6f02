import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_LINES: dict[int, str] = {}


def record(number: int, title: str, ok: bool, note: str):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({note})"
    _LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
