"""Shared pytest hooks.

The acceptance gate registers one verdict line per shipped guarantee;
echoing them in the terminal summary keeps the verdicts visible even
when every test passes and stdout capture swallows the prints.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
