import numpy as np
import pytest
from hypothesis import settings

from genconn import catalog

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("fast", max_examples=10, deadline=None)
settings.load_profile("default")

_criteria: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(catalog.THREE_ATOM))
def alphabet3(request):
    return catalog.THREE_ATOM[request.param]()


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_criterion_"):
        _criteria[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("_")[2])):
        outcome = "PASS" if _criteria[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{outcome}] {name}")
