import pytest

_LINES = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record ``(passed, detail)`` for an acceptance criterion; printed in the summary."""
    lines = request.config.stash.setdefault(_LINES, {})

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        lines[number] = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        print(lines[number])
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
