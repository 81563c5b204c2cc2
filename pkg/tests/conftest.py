import _verdicts


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _verdicts.LINES:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts.LINES:
            terminalreporter.write_line(line)
