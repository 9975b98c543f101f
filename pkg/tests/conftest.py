import pytest

from lticap import kernels
from lticap.filters import Butterworth4, FilterStage, cascade
from lticap.physics import PhysicalEnvironment

# photons of thermal occupancy at 1550 nm and 300 K, from CODATA 2018 constants
# evaluated with 50-digit mpmath: 1/expm1(hbar*w0/(k_B*T))
CELL_OCCUPANCY = 3.6500945669990124858e-14


@pytest.fixture(scope="session")
def cell_env():
    return PhysicalEnvironment.from_wavelength(1550e-9, 300.0)


@pytest.fixture(scope="session")
def cell_shape():
    return Butterworth4.from_hz(20e9)


@pytest.fixture(scope="session")
def config1(cell_env, cell_shape):
    """Attenuator (-20 dB) followed by the compensating amplifier (+20 dB)."""
    return cascade([FilterStage(cell_shape, -20.0), FilterStage(cell_shape, 20.0)], cell_env)


@pytest.fixture(scope="session")
def config2(cell_env, cell_shape):
    return cascade([FilterStage(cell_shape, 20.0), FilterStage(cell_shape, -20.0)], cell_env)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.BACKEND
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one verdict line per acceptance criterion; echoed in the terminal summary."""
    def record(key, passed, detail, seconds=None):
        timing = f" [{seconds:.2f} s]" if seconds is not None else ""
        line = f"{key:<4} {'PASS' if passed else 'FAIL'}  {detail}{timing}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
