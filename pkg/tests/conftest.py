"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

import pytest

_criteria: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when == "teardown":
        return
    num, title = mark.args
    entry = _criteria.setdefault(num, {"title": title, "passed": 0, "failed": [], "seconds": 0.0})
    entry["seconds"] += rep.duration
    if rep.when == "setup":
        if rep.failed:
            entry["failed"].append(item.name)
        return
    if rep.passed:
        entry["passed"] += 1
    else:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        e = _criteria[num]
        verdict = "FAIL" if e["failed"] else "PASS"
        checks = e["passed"] + len(e["failed"])
        line = f"criterion {num} [{e['title']}]: {verdict} ({e['passed']}/{checks} checks, {e['seconds']:.2f}s)"
        if e["failed"]:
            line += " failing: " + ", ".join(e["failed"])
        terminalreporter.write_line(line)
