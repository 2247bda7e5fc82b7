import numpy as np
import pytest

from sparsemimo.params import ChannelParams, EstimatorConfig, MimoGeometry, SystemParams
from sparsemimo.pilots import default_plan


@pytest.fixture
def system():
    return SystemParams()


@pytest.fixture
def geometry():
    return MimoGeometry(4, 4)


@pytest.fixture
def plan(geometry, system):
    return default_plan(geometry, 64, 16, system.N)


@pytest.fixture
def itu():
    return ChannelParams.itu_veh_b()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def estimator(P, R=0, **kw):
    return EstimatorConfig(R=R, P_assumed=P, **kw)


_REPORT = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT] = []


@pytest.fixture
def acceptance_report(request):
    """Record one acceptance-criterion verdict for the terminal summary."""
    lines = request.config.stash[_REPORT]

    def record(number, title, passed, detail):
        lines.append(f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
