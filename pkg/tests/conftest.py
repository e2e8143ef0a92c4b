import numpy as np
import pytest

from mrfmqc import _purepy
from mrfmqc.fields import MachineGeometry
from mrfmqc.spinmodel import DonorParams

try:
    from mrfmqc import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [pytest.param(_purepy, id="python")]
if _kernels is not None:
    BACKENDS.append(pytest.param(_kernels, id="cython"))


@pytest.fixture
def geometry():
    return MachineGeometry()


@pytest.fixture
def params():
    return DonorParams()


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for reports in terminalreporter.stats.values():
        for report in reports:
            for key, value in getattr(report, "user_properties", ()):
                if key == "acceptance" and getattr(report, "when", "call") == "call":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
