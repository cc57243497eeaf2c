import math

import pytest

from memdiff import geometry

_criteria = {}


@pytest.fixture
def pi_interval():
    return geometry.DomainSpec.interval(math.pi)


@pytest.fixture
def pi_square():
    return geometry.DomainSpec.rectangle(math.pi, math.pi)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = dict(report.user_properties).get("criterion")
    if label is not None and _criteria.get(label) != "failed":
        _criteria[label] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: int(s.split()[0])):
        status = "PASS" if _criteria[label] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {label}")
