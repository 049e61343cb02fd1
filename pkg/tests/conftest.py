import numpy as np
import pytest

import slowdecay as sd


@pytest.fixture
def neumann4():
    return sd.build_basis(sd.BasisKind.NEUMANN_1D, 4, 16)


@pytest.fixture
def neumann16():
    return sd.build_basis(sd.BasisKind.NEUMANN_1D, 16)


@pytest.fixture
def dirichlet16():
    return sd.build_basis(sd.BasisKind.DIRICHLET_SHIFTED_1D, 16)


@pytest.fixture
def scalar_basis():
    return sd.build_basis(sd.BasisKind.SCALAR, 1)


def mode_vector(n, k, amp):
    out = np.zeros(n)
    out[k] = amp
    return out


def neumann_rank_one(p=2.0, n=16):
    """Rank-one nonlinearity mixing the kernel and the first range mode."""
    phi = np.zeros(n)
    phi[0] = 1.0
    phi[1] = 1.0
    return sd.rank_one(p, phi)


def small_random_data(rng, n, scale=0.1):
    a = rng.uniform(0.2, 1.0) * scale * rng.standard_normal(n)
    b = rng.uniform(0.2, 1.0) * scale * rng.standard_normal(n)
    return a, b
