import math

import numpy as np
import pytest

from weierp.lattice import Lattice, reduce_generators, shortest_vector
from weierp.wp import pole_distance


@pytest.fixture(scope="session")
def square() -> Lattice:
    return reduce_generators(1.0, 1j)


@pytest.fixture(scope="session")
def hexagonal() -> Lattice:
    # exact real part 1/2 keeps the reduced tau (and hence the detected
    # minimal polynomial) on the tau = e^{i pi/3} side of the boundary
    return reduce_generators(1.0, complex(0.5, math.sqrt(3.0) / 2.0))


@pytest.fixture(scope="session")
def rect2i() -> Lattice:
    return reduce_generators(1.0, 2j)


@pytest.fixture(scope="session")
def reference_lattices(square, hexagonal, rect2i):
    return [square, hexagonal, rect2i]


def cell_points(lat, rng, count, margin=0.1, multiples=()):
    """Random fundamental-cell points with pole margins, also for k*z."""
    lam = shortest_vector(lat)
    out = []
    while len(out) < count:
        u, v = rng.uniform(0.0, 1.0, 2)
        z = u * lat.omega1 + v * lat.omega2
        if pole_distance(z, lat) <= margin * lam:
            continue
        if any(pole_distance(k * z, lat) <= margin * lam for k in multiples):
            continue
        out.append(z)
    return out


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)
