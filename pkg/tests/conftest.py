"""Shared pytest plumbing: surfaces the acceptance PASS/FAIL lines in the
terminal summary, where file-descriptor capture cannot swallow them."""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
