"""Shared fixtures: exact solutions and cached (session-scoped) solves."""

from __future__ import annotations

import numpy as np
import pytest

from lpsub import bie, geometry
from lpsub.kernels import single_kernel

KITE_X0 = np.array([0.1, 0.4])
STAR_X0 = np.array([0.2, 0.8])
SPHERE_X0 = np.array([0.1, 0.2, 0.3])
POINT_A = np.array([-0.0065, -0.0327, 1.9997])
POINT_B = np.array([-0.3526, -1.7728, 0.8561])


def dipole(x, x0=KITE_X0):
    """u(x) = (x1 - x01)/|x - x0|^2, harmonic away from x0."""
    d = np.asarray(x) - x0
    return d[..., 0] / np.sum(d * d, axis=-1) + 0.0j


def dipole_neumann(p, n, x0=KITE_X0):
    d = np.asarray(p) - x0
    r2 = np.sum(d * d, axis=-1)
    grad = -2.0 * d[..., 0:1] * d / r2[..., None] ** 2
    grad[..., 0] += 1.0 / r2
    return np.sum(np.asarray(n) * grad, axis=-1)


def helm_source(x, k, x0=STAR_X0, dim=2):
    return single_kernel("helmholtz", dim, np.asarray(x), x0, k)


def monopole3d(x, x0=np.zeros(3)):
    return 1.0 / np.linalg.norm(np.asarray(x) - x0, axis=-1) + 0.0j


def monopole3d_neumann(p, n, x0=np.zeros(3)):
    d = np.asarray(p) - x0
    return -np.sum(np.asarray(n) * d, axis=-1) / np.linalg.norm(d, axis=-1) ** 3


@pytest.fixture(scope="session")
def kite():
    return geometry.kite()


@pytest.fixture(scope="session")
def star():
    return geometry.star()


@pytest.fixture(scope="session")
def unit_circle():
    return geometry.circle(1.0)


@pytest.fixture(scope="session")
def sphere2():
    return geometry.sphere(2.0)


@pytest.fixture(scope="session")
def kite_neumann_density(kite):
    return bie.solve_laplace_neumann_2d(kite, dipole_neumann, 128)


@pytest.fixture(scope="session")
def star_kress_density(star):
    return bie.solve_helmholtz_kress_2d(
        star, 15.0, lambda p, n: helm_source(p, 15.0), 256
    )


@pytest.fixture(scope="session")
def star_pws_density(star):
    return bie.solve_helmholtz_pws_2d(
        star, 15.0, lambda p, n: helm_source(p, 15.0), 256
    )


@pytest.fixture(scope="session")
def sphere_neumann_density(sphere2):
    return bie.solve_galerkin_3d(sphere2, "laplace-neumann", monopole3d_neumann, N=16)


@pytest.fixture(scope="session")
def sphere_helmholtz_density(sphere2):
    return bie.solve_galerkin_3d(
        sphere2,
        "helmholtz",
        lambda p, n: helm_source(p, 5.0, SPHERE_X0, dim=3),
        k=5.0,
        N=16,
    )
