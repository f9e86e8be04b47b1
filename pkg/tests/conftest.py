import pytest

_ACCEPTANCE: dict[str, str] = {}


class AcceptanceLog:
    def record(self, key: str, passed: bool, detail: str) -> None:
        line = f"{key} {'PASS' if passed else 'FAIL'}: {detail}"
        _ACCEPTANCE[key] = line
        print(line)


@pytest.fixture
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[key])
