import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(label): print a per-criterion PASS/FAIL line when the test finishes",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if hasattr(report, "wasxfail"):
        status = "FAIL (known, see notes)" if report.skipped else "PASS (unexpectedly)"
    elif report.passed:
        status = "PASS"
    else:
        status = "FAIL"
    writer = item.config.pluginmanager.get_plugin("terminalreporter")
    if writer is not None:
        writer.ensure_newline()
        writer.write_line(f"criterion {marker.args[0]}: {status}")
