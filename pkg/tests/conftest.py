import os

import pytest

from geosocial import _kernels
from geosocial.graph import EdgeKind, GeoPoint, GeosocialGraph

DATA = os.path.join(os.path.dirname(__file__), "data")
TINY = os.path.join(DATA, "tiny")

BACKENDS = [pytest.param(_kernels.python_backend, id="python")]
if _kernels.compiled_backend is not None:
    BACKENDS.append(pytest.param(_kernels.compiled_backend, id="cython"))


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture
def tiny_paths():
    return tuple(os.path.join(TINY, f"{n}.json") for n in ("business", "user", "review"))


@pytest.fixture
def four_node():
    """u - f (0.9), f - s1 (0.8), u - s2 (0.5); both SPs sell sushi at the center."""
    g = GeosocialGraph()
    u = g.add_user("u")
    f = g.add_user("f")
    s1 = g.add_service_provider("s1", "First", {"sushi"}, GeoPoint(36.1, -115.1))
    s2 = g.add_service_provider("s2", "Second", {"sushi", "bar"}, GeoPoint(36.1, -115.1))
    g.connect(u, f, 0.9, EdgeKind.FRIENDSHIP)
    g.connect(f, s1, 0.8, EdgeKind.REVIEW, stars=4)
    g.connect(u, s2, 0.5, EdgeKind.REVIEW, stars=3)
    g.set_sp_stats(s1, 1, 4.0)
    g.set_sp_stats(s2, 1, 3.0)
    return g


# acceptance reporting -------------------------------------------------------

_acceptance_results = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _acceptance_results.append((number, title, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    verdicts = {}
    for number, title, outcome in _acceptance_results:
        ok = verdicts.get((number, title), True)
        verdicts[(number, title)] = ok and outcome == "passed"
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(verdicts.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
