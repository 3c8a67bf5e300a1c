"""Shared fixtures: one PASS/FAIL verdict line per acceptance criterion."""
import pytest

_VERDICTS: dict = {}


@pytest.fixture
def record_verdict(capsys):
    """Record and print ``criterion N: PASS|FAIL detail``; returns the pass flag."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
        _VERDICTS[number] = line
        with capsys.disabled():
            print(f"\n{line}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance")
    for number in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[number])
