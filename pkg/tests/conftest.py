import pytest

_acceptance_reports = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in str(item.fspath):
        _acceptance_reports.append((item, report))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_reports:
        return
    terminalreporter.section("acceptance criteria")
    for item, report in _acceptance_reports:
        status = "PASS" if report.passed else "FAIL"
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        terminalreporter.write_line(f"{status}  {doc}")
