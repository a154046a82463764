import pytest

# Acceptance criteria register their verdicts here; the terminal summary
# prints one line per criterion in numeric order.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture
def criterion():
    def record(number, text, ok):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record
