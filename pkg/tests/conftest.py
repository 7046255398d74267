import pytest

_VERDICTS: list[tuple[tuple, str]] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(label, ok: bool, detail: str) -> None:
        label = str(label)
        num = int("".join(ch for ch in label if ch.isdigit()))
        line = f"criterion {label:>3}: {'PASS' if ok else 'FAIL'} | {detail}"
        _VERDICTS.append(((num, label), line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
