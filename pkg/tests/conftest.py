import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # lets test modules import the local oracles

_RESULTS = {}
_START = time.perf_counter()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        n = marker.args[0]
        ok = report.passed
        _RESULTS.setdefault(n, []).append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    from diractime.acceptance import TITLES

    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        runs = _RESULTS[n]
        ok = all(passed for _, passed in runs)
        failed = [name for name, passed in runs if not passed]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {TITLES[n]}{tail}")
    terminalreporter.write_line(f"session wall-clock: {time.perf_counter() - _START:.1f} s")
