"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_verdicts = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    failed_setup = report.when == "setup" and not report.passed
    if report.when == "call" or failed_setup:
        detail = dict(item.user_properties).get("detail", "")
        _verdicts[label] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_verdicts, key=lambda s: int(s.split()[0].lstrip("AC"))):
        verdict, detail = _verdicts[label]
        terminalreporter.write_line(f"{verdict}  {label}" + (f"  [{detail}]" if detail else ""))
