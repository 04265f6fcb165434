"""Shared pytest plumbing.

The acceptance tests register exactly one summary line each; the terminal
hook prints them after the run so the pass/fail ledger is always visible.
"""

import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then enforce it."""

    def record(num: int, label: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {num:02d} {label}: {detail}"
        _LINES.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_LINES):
        terminalreporter.write_line(line)
