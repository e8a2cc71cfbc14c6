import pytest

ACCEPTANCE_FILE = "test_acceptance.py"
_outcomes: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if ACCEPTANCE_FILE not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[name] = (report.outcome, report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for number, (func, title) in sorted(CRITERIA.items()):
        outcome = _outcomes.get(func, ("not run", ""))[0]
        status = "PASS" if outcome == "passed" else ("FAIL" if outcome == "failed" else outcome.upper())
        terminalreporter.write_line(f"criterion {number:2d} {status:7s} {title}")
