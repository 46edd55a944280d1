import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Record the verdict for one numbered acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
