import numpy as np
import pytest

from oscbath.cavity import solve_spectrum, transform_matrix
from oscbath.model import CavitySpec, validate_params


@pytest.fixture(scope="session")
def fig_params():
    return validate_params(1.0, 0.1, 2.0, 1.0)


@pytest.fixture(scope="session")
def big_cavity(fig_params):
    cav = CavitySpec(60.0, 256)
    spec = solve_spectrum(fig_params, cav)
    return spec, transform_matrix(fig_params, spec)


@pytest.fixture(scope="session")
def small_cavity(fig_params):
    cav = CavitySpec(10.0, 32)
    spec = solve_spectrum(fig_params, cav)
    return spec, transform_matrix(fig_params, spec)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
