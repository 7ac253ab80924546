"""Shared test plumbing: acceptance tests append one line per criterion to
ACCEPTANCE_LINES; the summary hook echoes them after the test run so the
pass/fail ledger is visible even when every test passes."""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
