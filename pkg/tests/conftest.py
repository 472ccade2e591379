"""Shared pytest hooks.

Acceptance tests register one verdict line each through the ``verdict``
fixture; the lines are repeated at the end of the terminal report so they
survive output capture.
"""

import pytest

VERDICTS = {}


@pytest.fixture
def verdict():
    def record(n, ok, detail):
        line = f"CRITERION {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        VERDICTS[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
