"""Shared fixtures and the per-criterion acceptance summary."""
import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_criteria = {}   # nodeid -> (number, title)
_outcomes = {}   # number -> list of bools


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    n = _criteria[report.nodeid][0]
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(n, []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    titles = {}
    for n, title in _criteria.values():
        titles.setdefault(n, title)
    terminalreporter.section("acceptance criteria")
    for n in sorted(titles):
        res = _outcomes.get(n)
        if not res:
            status = "NOT RUN"
        else:
            status = "PASS" if all(res) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {titles[n]}")


@pytest.fixture
def rng():
    return random.Random(12345)
