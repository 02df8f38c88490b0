import math

import pytest

from satrep import ChannelParams, LinkBudget, RepetitionPolicy, make_geometry
from satrep.scenario import Scenario, phi_max_for


@pytest.fixture(scope="session")
def geom():
    return make_geometry()


@pytest.fixture(scope="session")
def channel():
    return ChannelParams()


@pytest.fixture(scope="session")
def budget():
    return LinkBudget.from_db()


@pytest.fixture(scope="session")
def scenario():
    return Scenario.default()


def make_policy(geom, a=5e-5, theta_min_deg=10.0, d0=1e-6, lambda0=0.05e-6):
    return RepetitionPolicy(d0=d0, a=a, phi_max_rad=phi_max_for(geom, math.radians(theta_min_deg)),
                            lambda0=lambda0)


# --- acceptance reporting -------------------------------------------------
# Tests marked ``@pytest.mark.acceptance(number, title)`` get one PASS/FAIL
# line each in the terminal summary (and in ``-s`` output as they run).

_ACCEPTANCE = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    _ACCEPTANCE.append((marker.args[0], marker.args[1], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} -- {detail}")


@pytest.fixture
def verdict(request):
    """Record and print the measured outcome of an acceptance check."""

    def _verdict(ok, detail):
        request.node.user_properties.append(("detail", detail))
        marker = request.node.get_closest_marker("acceptance")
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {marker.args[0]}: {detail}")
        return ok

    return _verdict
