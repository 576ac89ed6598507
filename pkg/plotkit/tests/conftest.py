import pytest

_CRITERION_LINES = []


@pytest.fixture
def criterion():
    def report(number: int, ok: bool, detail: str = ""):
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        print(line, flush=True)
        _CRITERION_LINES.append(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria (plotting)")
    for line in _CRITERION_LINES:
        terminalreporter.write_line(line)
