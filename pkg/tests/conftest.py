import pytest

_RESULTS: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; call as ``criterion(n, title, passed, detail)``."""

    def record(n, title, passed, detail=""):
        _RESULTS.append(f"[{'PASS' if passed else 'FAIL'}] AC{n} {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS):
            terminalreporter.write_line(line)
