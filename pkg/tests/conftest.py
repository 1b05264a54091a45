import pytest

# One line per acceptance criterion, collected by the `acceptance_report`
# fixture and replayed after the run so the verdicts are visible without -s.
_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    def report(criterion: int, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        line = f"[acceptance] criterion {criterion}: {status}"
        if detail:
            line += f" - {detail}"
        _ACCEPTANCE_LINES.append((criterion, line))
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
