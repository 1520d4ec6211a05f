import numpy as np
import pytest

from emergent_particles.grid import PacketParams, gaussian_packet, make_grid


@pytest.fixture
def grid():
    return make_grid(-10.0, 10.0, 256)


@pytest.fixture
def disjoint_pair(grid):
    phi = gaussian_packet(grid, PacketParams(-4.0, 0.0, 0.5))
    psi = gaussian_packet(grid, PacketParams(4.0, 0.0, 0.5))
    return phi, psi


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
