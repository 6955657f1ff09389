"""Shared pytest configuration: per-criterion summary lines for the acceptance suite."""

import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, description): one numbered acceptance criterion; the "
        "run summary prints a PASS/FAIL line per criterion",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, desc = mark.args
    if rep.when == "call":
        _results[num] = (desc, rep.passed)
    elif rep.failed or rep.skipped:
        # a criterion that errors in setup or is skipped did not pass
        _results[num] = (desc, False)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        desc, ok = _results[num]
        terminalreporter.write_line(
            f"criterion {num} ({desc}): {'PASS' if ok else 'FAIL'}"
        )
