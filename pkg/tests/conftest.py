"""Shared pytest plumbing.

Collects the one-line verdicts emitted by the acceptance suite and
prints them in a dedicated section at the end of the run, so the gate
result is visible even when per-test output is captured.
"""

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance gate")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
