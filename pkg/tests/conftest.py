import pytest

ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance verdict; all verdicts are printed at the end of the session."""

    def _report(number, title, passed, detail=""):
        ACCEPTANCE.append((number, title, passed, detail))
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        verdict = {True: "PASS", False: "FAIL", None: "SKIP"}[passed]
        terminalreporter.write_line(f"[{verdict}] {number}. {title}: {detail}")
