import pytest

# criterion number -> (title, list of outcomes)
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion check")
    config.addinivalue_line("markers", "slow: runs full 50 s scenarios")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    entry = _CRITERIA.setdefault(n, (title, []))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry[1].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, results = _CRITERIA[n]
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(
            f"criterion {n}: {status}  {title} ({sum(results)}/{len(results)} checks)")
