import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, text = mark.args
    failed = report.failed
    passed = report.passed and report.when == "call"
    prev = _criteria.get(item.nodeid)
    if failed:
        _criteria[item.nodeid] = (number, text, "FAIL")
    elif passed and prev is None:
        _criteria[item.nodeid] = (number, text, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    grouped = {}
    for number, text, status in _criteria.values():
        grouped.setdefault((number, text), []).append(status)
    terminalreporter.section("acceptance criteria")
    for (number, text), statuses in sorted(grouped.items()):
        status = "FAIL" if "FAIL" in statuses else "PASS"
        cases = f" [{len(statuses)} cases]" if len(statuses) > 1 else ""
        terminalreporter.write_line(f"{status}  criterion {number}: {text}{cases}")
