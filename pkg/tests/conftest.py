import pytest

# Acceptance tests report one line per criterion; collect them here so the
# verdicts survive output capture and reprint after the test summary.
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
    terminalreporter.section("acceptance criteria")
    for line in sorted(_CRITERION_LINES,
                       key=lambda s: int(s.split(":")[0].split()[1])):
        terminalreporter.write_line(line)
