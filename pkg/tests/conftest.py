import pytest

from beamwaves.params import running_example
from beamwaves.solver import solve_wave


@pytest.fixture(scope="session")
def example():
    return running_example()


@pytest.fixture(scope="session")
def wave_diag(example):
    params, geom = example
    return solve_wave((1e-2, 1e-2), params, geom, N=16)


@pytest.fixture(scope="session")
def wave_axis(example):
    params, geom = example
    return solve_wave((1e-2, 0.0), params, geom, N=16)
