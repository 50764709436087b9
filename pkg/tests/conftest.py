import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    state = _criteria.setdefault(number, {"title": title, "status": "PASS", "detail": ""})
    if report.skipped:
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""
        state.update(status="SKIP", detail=reason.removeprefix("Skipped: "))
    elif report.failed:
        state.update(status="FAIL", detail=f"{item.name} failed in {report.when}")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        c = _criteria[number]
        line = f"criterion {number}: {c['status']:4}  {c['title']}"
        if c["detail"]:
            line += f"  ({c['detail']})"
        terminalreporter.write_line(line)
