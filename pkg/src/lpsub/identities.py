"""Numerical certification of the layer-potential identity.

For any solution u of the PDE (Laplace or Helmholtz) inside D,

    int_dD [ dG/dn_y(x, y) u(y) - G(x, y) du/dn(y) ] dsigma_y
        = -u(x)      x in D
        = -u(x)/2    x on dD
        = 0          x outside D.

The interior/exterior statements are the classical representation
formula; the boundary value -1/2 u(x*) is certified here against the
alternatives. Off-boundary points use the PTR (2D) or the rotated
three-step rule (3D); boundary points use Kress quadrature for the
weakly singular single-layer factor in 2D (for the Laplace log kernel
as well as Helmholtz) and the rotated product rule in 3D.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .geometry import (
    Boundary,
    Curve2D,
    Surface3D,
    boundary_sample,
    curve_grid,
    nearest_boundary_point,
)
from .kernels import dlp_kernel, single_kernel
from .quadrature import (
    dlp_split,
    kress_weights,
    rotated_sphere_grid,
    slp_split,
    three_step_eval,
)

__all__ = [
    "IdentityCase",
    "identity_lhs",
    "identity_residual",
    "builtin_cases",
    "expected_value",
]

_USOL_KINDS = ("constant", "linear", "green-laplace", "plane-wave", "green-helmholtz")


@dataclass(frozen=True)
class IdentityCase:
    """One identity check: an interior solution, a region, and a point.

    For off-boundary regions `point` is the evaluation point; for the
    boundary region `param` names the boundary point. Green poles x0
    must lie strictly outside (distance > 0.1); plane-wave directions s
    are unit vectors.
    """

    family: str  # laplace | helmholtz
    usol: str
    region: str  # interior | boundary | exterior
    point: Optional[np.ndarray] = None
    param: object = None
    k: Optional[float] = None
    a: Optional[np.ndarray] = None  # linear solution a . y
    x0: Optional[np.ndarray] = None  # Green pole
    s: Optional[np.ndarray] = None  # plane-wave direction

    def label(self) -> str:
        return f"{self.family}:{self.usol}"

    def __post_init__(self):
        if self.family not in ("laplace", "helmholtz"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.usol not in _USOL_KINDS:
            raise ValueError(f"unknown interior solution {self.usol!r}")
        if self.region not in ("interior", "boundary", "exterior"):
            raise ValueError(f"unknown region {self.region!r}")
        laplace_usol = self.usol in ("constant", "linear", "green-laplace")
        if laplace_usol != (self.family == "laplace"):
            raise ValueError(f"{self.usol} is not a {self.family} solution")
        if self.family == "helmholtz" and (self.k is None or not self.k > 0):
            raise ValueError("Helmholtz cases need a positive wavenumber")
        if self.region == "boundary":
            if self.param is None:
                raise ValueError("boundary cases need a boundary parameter")
        elif self.point is None:
            raise ValueError("off-boundary cases need an evaluation point")


def _usol_callables(case: IdentityCase, boundary: Boundary):
    dim = boundary.dim
    if case.usol == "constant":
        return (
            lambda y: np.ones(np.asarray(y).shape[:-1], dtype=complex),
            lambda y, n: np.zeros(np.asarray(y).shape[:-1], dtype=complex),
        )
    if case.usol == "linear":
        a = np.asarray(case.a, dtype=float)
        return (lambda y: np.asarray(y) @ a + 0.0j, lambda y, n: np.asarray(n) @ a + 0.0j)
    if case.usol == "green-laplace":
        x0 = _checked_pole(case, boundary)
        return (
            lambda y: single_kernel("laplace", dim, np.asarray(y), x0),
            lambda y, n: dlp_kernel("laplace", dim, x0, np.asarray(y), np.asarray(n)),
        )
    if case.usol == "plane-wave":
        s = np.asarray(case.s, dtype=float)
        if abs(np.linalg.norm(s) - 1.0) > 1e-12:
            raise ValueError(f"plane-wave direction must be unit, got |s|={np.linalg.norm(s)}")
        k = case.k
        u = lambda y: np.exp(1j * k * (np.asarray(y) @ s))
        return (u, lambda y, n: 1j * k * (np.asarray(n) @ s) * u(y))
    x0 = _checked_pole(case, boundary)
    k = case.k
    return (
        lambda y: single_kernel("helmholtz", dim, np.asarray(y), x0, k),
        lambda y, n: dlp_kernel("helmholtz", dim, x0, np.asarray(y), np.asarray(n), k),
    )


def _checked_pole(case: IdentityCase, boundary: Boundary) -> np.ndarray:
    x0 = np.asarray(case.x0, dtype=float)
    _, dist, side = nearest_boundary_point(boundary, x0)
    if side != "exterior" or dist <= 0.1:
        raise ValueError(f"Green pole {x0} must lie outside at distance > 0.1")
    return x0


def expected_value(case: IdentityCase, boundary: Boundary) -> complex:
    """Right-hand side of the identity for the case's region."""
    if case.region == "exterior":
        return 0.0 + 0.0j
    u, _ = _usol_callables(case, boundary)
    if case.region == "interior":
        return -complex(u(np.asarray(case.point, dtype=float)[None, :])[0])
    xs = boundary_sample(boundary, case.param)
    return -0.5 * complex(u(xs.point[None, :])[0])


def identity_lhs(case: IdentityCase, boundary: Boundary, N: int) -> complex:
    """Quadrature value of the identity's left-hand side."""
    u, du = _usol_callables(case, boundary)
    fam = case.family
    if case.region != "boundary":
        x = np.asarray(case.point, dtype=float)
        if isinstance(boundary, Curve2D):
            grid = curve_grid(boundary, N)
            w = grid.weight * grid.speeds
            vals = dlp_kernel(fam, 2, x, grid.points, grid.normals, case.k) * u(
                grid.points
            ) - single_kernel(fam, 2, x, grid.points, case.k) * du(
                grid.points, grid.normals
            )
            return complex(np.sum(w * vals))
        param, _, _ = nearest_boundary_point(boundary, x)
        xs = boundary_sample(boundary, param)

        def integrand(xx, pts, nrm):
            return dlp_kernel(fam, 3, xx, pts, nrm, case.k) * u(pts) - single_kernel(
                fam, 3, xx, pts, case.k
            ) * du(pts, nrm)

        return three_step_eval(boundary, integrand, xs, x, N)

    # boundary case
    if isinstance(boundary, Curve2D):
        tstar = float(case.param)
        grid = curve_grid(boundary, N)
        xs = boundary_sample(boundary, tstar)
        uv = u(grid.points)
        duv = du(grid.points, grid.normals)
        L1, L2 = dlp_split(grid, fam, case.k, tstar)
        M1, M2 = slp_split(grid, fam, case.k, tstar)
        T1 = L1[0] * uv - M1[0] * duv
        T2 = L2[0] * uv - M2[0] * duv
        R = kress_weights(N, tstar).weights
        return complex(np.sum(R * T1) + grid.weight * np.sum(T2))
    xs = boundary_sample(boundary, case.param)
    rot = rotated_sphere_grid(boundary, xs, N)
    vals = dlp_kernel(fam, 3, xs.point, rot.points, rot.normals, case.k) * u(
        rot.points
    ) - single_kernel(fam, 3, xs.point, rot.points, case.k) * du(rot.points, rot.normals)
    return complex(np.sum(rot.weights * vals))


def identity_residual(case: IdentityCase, boundary: Boundary, N: int) -> float:
    """|lhs - expected| for the case, in absolute terms."""
    return abs(identity_lhs(case, boundary, N) - expected_value(case, boundary))


def builtin_cases(
    boundary: Boundary,
    family: str,
    region: str,
    point=None,
    param=None,
    k: float = 5.0,
) -> Tuple[IdentityCase, ...]:
    """The built-in solution matrix for one family and region.

    Laplace: constant, linear and Green-based; Helmholtz: plane wave and
    Green-based. Directions and poles are fixed relative to the shape's
    size so poles stay safely exterior.
    """
    dim = boundary.dim
    half = 0.75 * boundary.diameter()
    center = np.asarray(boundary.interior_point())
    x0 = center + (np.array([half, half]) if dim == 2 else np.array([half, half, 0.5 * half]))
    a = np.array([0.8, -0.6]) if dim == 2 else np.array([0.8, -0.36, 0.48])
    s = np.zeros(dim)
    s[0] = 1.0
    common = dict(region=region, point=None if point is None else np.asarray(point, float), param=param)
    if family == "laplace":
        return (
            IdentityCase(family="laplace", usol="constant", **common),
            IdentityCase(family="laplace", usol="linear", a=a, **common),
            IdentityCase(family="laplace", usol="green-laplace", x0=x0, **common),
        )
    return (
        IdentityCase(family="helmholtz", usol="plane-wave", k=k, s=s, **common),
        IdentityCase(family="helmholtz", usol="green-helmholtz", k=k, x0=x0, **common),
    )
