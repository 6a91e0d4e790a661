"""Shared pytest hooks.

The acceptance suite records one line per criterion; the terminal summary
prints them all so a full run always ends with the per-criterion verdicts.
"""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
