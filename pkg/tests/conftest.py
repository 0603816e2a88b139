import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from energylab import ForcingSpec, Grid, InitialSpec, SolverConfig, simulate  # noqa: E402

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    name = report.user_properties and dict(report.user_properties).get("criterion")
    if not name:
        return
    if report.when == "call" or report.outcome != "passed":
        detail = dict(report.user_properties).get("measured", "")
        _ACCEPTANCE[name] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (outcome, detail) in _ACCEPTANCE.items():
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        record_property("criterion", marker.args[0])


@pytest.fixture(scope="session")
def beltrami_run():
    cfg = SolverConfig(Grid(32), 0.1, 1e-3, 1.0, ForcingSpec("none"), InitialSpec("beltrami"), snapshot_stride=100)
    return simulate(cfg)


@pytest.fixture(scope="session")
def tg32_run():
    cfg = SolverConfig(Grid(32), 0.05, 5e-3, 2.0, ForcingSpec("none"), InitialSpec("taylor_green"), snapshot_stride=10)
    return simulate(cfg)


@pytest.fixture(scope="session")
def tg64_run():
    cfg = SolverConfig(Grid(64), 0.05, 2e-3, 2.0, ForcingSpec("none"), InitialSpec("taylor_green"), snapshot_stride=50)
    return simulate(cfg)


@pytest.fixture(scope="session")
def forced_run():
    cfg = SolverConfig(Grid(32), 0.1, 5e-3, 1.0, ForcingSpec("balanced"), InitialSpec("beltrami", (1.0, 0.7, 0.4)), snapshot_stride=20)
    return simulate(cfg)
