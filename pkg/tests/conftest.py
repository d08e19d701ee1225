import pytest

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def record():
    """``record(n, ok, detail)`` adds one line to the acceptance summary."""

    def add(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append((n, line))
        print(line)
        return ok

    return add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
