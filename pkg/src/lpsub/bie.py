"""Boundary integral equation solvers.

2D problems use Nystrom collocation on the PTR grid:

  * interior Dirichlet Laplace:  (-1/2 I + D) mu = f, where the smooth
    double-layer kernel carries the curvature diagonal limit
    -kappa |y'| / (4 pi);
  * exterior Neumann Laplace:    (K' - 1/2 I) rho = g with the adjoint
    double-layer kernel (the exterior trace of the single layer);
  * sound-soft Helmholtz:        (1/2 I + D - ik S) mu = f via Kress
    quadrature for the logarithmic singularity;
  * plane-wave-subtracted Helmholtz BIE: every integrand vanishes at the
    collocation node, so plain PTR applies and the diagonal contribution
    is zero.

The 3D solvers are spherical-harmonic Galerkin methods on the sphere:
inner products use the product Gaussian rule, and each inner (weakly
singular) integral is computed on a grid rotated so the collocation
point sits at the north pole.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .geometry import Curve2D, CurveGrid, Surface3D, curve_grid
from .kernels import adjoint_dlp_kernel, dlp_kernel, single_kernel
from .quadrature import (
    dlp_split,
    kress_log_matrix,
    kress_split_helmholtz,
    sphere_grid,
)
from .specfun import sph_harm_table

logger = logging.getLogger(__name__)

__all__ = [
    "Density2D",
    "DensitySH",
    "solve_laplace_dirichlet_2d",
    "solve_laplace_neumann_2d",
    "solve_helmholtz_kress_2d",
    "solve_helmholtz_pws_2d",
    "solve_galerkin_3d",
    "density_interp",
    "save_density",
    "load_density",
]

BoundaryData = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def _rotations_to_pole(units: np.ndarray) -> np.ndarray:
    """Batch of rotations R with R u = e3 (Rodrigues), shape (B, 3, 3)."""
    B = units.shape[0]
    e3 = np.array([0.0, 0.0, 1.0])
    axis = np.cross(units, e3)
    s = np.linalg.norm(axis, axis=-1)
    c = units[:, 2]
    R = np.empty((B, 3, 3))
    reg = s >= 1e-14
    a = axis[reg] / s[reg, None]
    K = np.zeros((int(np.sum(reg)), 3, 3))
    K[:, 0, 1], K[:, 0, 2] = -a[:, 2], a[:, 1]
    K[:, 1, 0], K[:, 1, 2] = a[:, 2], -a[:, 0]
    K[:, 2, 0], K[:, 2, 1] = -a[:, 1], a[:, 0]
    R[reg] = (
        np.eye(3)
        + s[reg, None, None] * K
        + (1.0 - c[reg, None, None]) * np.einsum("bij,bjk->bik", K, K)
    )
    R[~reg & (c > 0)] = np.eye(3)
    R[~reg & (c <= 0)] = np.diag([1.0, -1.0, -1.0])
    return R


# ---------------------------------------------------------------------------
# Density containers
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Density2D:
    """Nodal density values on the PTR grid of a 2D curve."""

    grid: CurveGrid
    values: np.ndarray  # (N,) complex
    residual: float = 0.0
    cond_warning: bool = False

    @property
    def curve(self) -> Curve2D:
        return self.grid.curve

    @property
    def N(self) -> int:
        return self.grid.N


@dataclass(frozen=True)
class DensitySH:
    """Spherical-harmonic expansion of a density on a sphere."""

    surface: Surface3D
    order: int  # expansion degrees n = 0 .. order-1
    coef: np.ndarray  # (order^2,) complex, packed per sph_index
    residual: float = 0.0

    def eval_dirs(self, theta, phi) -> np.ndarray:
        table = sph_harm_table(self.order, np.ravel(theta), np.ravel(phi))
        return (table @ self.coef).reshape(np.shape(theta))

    def eval_points(self, points) -> np.ndarray:
        u = (np.asarray(points) - np.asarray(self.surface.center)) / self.surface.radius
        theta = np.arccos(np.clip(u[..., 2], -1.0, 1.0))
        phi = np.arctan2(u[..., 1], u[..., 0])
        return self.eval_dirs(theta, phi)


def _sample_data(data: BoundaryData, points, normals):
    if callable(data):
        vals = np.asarray(data(points, normals), dtype=complex)
    else:
        vals = np.asarray(data, dtype=complex)
    if vals.shape != (points.shape[0],):
        raise ValueError(
            f"boundary data has shape {vals.shape}, expected ({points.shape[0]},)"
        )
    return vals


def _dense_solve(A: np.ndarray, b: np.ndarray, what: str):
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        try:
            cond = float(np.linalg.cond(A, 2))
        except np.linalg.LinAlgError:
            cond = float("inf")
        raise ValueError(f"singular {what} system (cond ~ {cond:.3e})") from exc
    nb = float(np.linalg.norm(b))
    residual = float(np.linalg.norm(A @ x - b)) / nb if nb > 0 else 0.0
    return x, residual


# ---------------------------------------------------------------------------
# 2D Nystrom solvers
# ---------------------------------------------------------------------------
def solve_laplace_dirichlet_2d(curve: Curve2D, f: BoundaryData, N: int) -> Density2D:
    """Density of the interior Dirichlet double-layer representation."""
    if N % 2 != 0:
        raise ValueError(f"N must be even, got {N}")
    grid = curve_grid(curve, N)
    _, L = dlp_split(grid, "laplace", None, grid.t)  # smooth kernel with diagonal
    A = -0.5 * np.eye(N, dtype=complex) + grid.weight * L
    b = _sample_data(f, grid.points, grid.normals)
    x, residual = _dense_solve(A, b, "Dirichlet Nystrom")
    return Density2D(grid=grid, values=x, residual=residual)


def solve_laplace_neumann_2d(curve: Curve2D, g: BoundaryData, N: int) -> Density2D:
    """Density of the exterior Neumann single-layer representation.

    The exterior normal-derivative trace of the single layer is
    (K' - 1/2) rho, with K' the adjoint double-layer operator; data g is
    taken with respect to the outward normal of the interior domain.
    """
    if N % 2 != 0:
        raise ValueError(f"N must be even, got {N}")
    grid = curve_grid(curve, N)
    dx = grid.points[:, None, :] - grid.points[None, :, :]
    r2 = np.sum(dx**2, axis=-1)
    np.fill_diagonal(r2, 1.0)
    ndot = np.sum(grid.normals[:, None, :] * dx, axis=-1)  # n_i . (x_i - y_j)
    K = -ndot / (2.0 * np.pi * r2) * grid.speeds[None, :]
    np.fill_diagonal(K, -grid.curvatures * grid.speeds / (4.0 * np.pi))
    A = -0.5 * np.eye(N, dtype=complex) + grid.weight * K
    b = _sample_data(g, grid.points, grid.normals)
    x, residual = _dense_solve(A, b, "Neumann Nystrom")
    cond = float(abs(np.linalg.cond(A, 1)))
    bad = cond > 1e12
    if bad:
        warnings.warn(
            f"Neumann system condition number {cond:.3e} exceeds 1e12",
            RuntimeWarning,
        )
    return Density2D(grid=grid, values=x, residual=residual, cond_warning=bad)


def solve_helmholtz_kress_2d(
    curve: Curve2D, k: float, f: BoundaryData, N: int
) -> Density2D:
    """Density of the combined-field sound-soft representation, with the
    logarithmic singularity handled by Kress quadrature."""
    if N % 2 != 0:
        raise ValueError(f"N must be even, got {N}")
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    grid = curve_grid(curve, N)
    K1, K2 = kress_split_helmholtz(grid, k, grid.t)
    R = kress_log_matrix(N)
    A = 0.5 * np.eye(N, dtype=complex) + R * K1 + grid.weight * K2
    b = _sample_data(f, grid.points, grid.normals)
    x, residual = _dense_solve(A, b, "Kress Nystrom")
    return Density2D(grid=grid, values=x, residual=residual)


def solve_helmholtz_pws_2d(
    curve: Curve2D, k: float, f: BoundaryData, N: int
) -> Density2D:
    """Density of the plane-wave-subtracted boundary integral equation.

    Off-diagonal entries reduce to the plain combined kernel; the
    diagonal collects the subtracted terms, whose integrands vanish at
    the collocation node, so the j = i contribution is zero.
    """
    if N % 2 != 0:
        raise ValueError(f"N must be even, got {N}")
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    grid = curve_grid(curve, N)
    X, nrm, sp = grid.points, grid.normals, grid.speeds
    off = ~np.eye(N, dtype=bool)
    xi = np.broadcast_to(X[:, None, :], (N, N, 2))[off]  # targets x_i
    yj = np.broadcast_to(X[None, :, :], (N, N, 2))[off]  # sources y_j
    nj = np.broadcast_to(nrm[None, :, :], (N, N, 2))[off]
    spj = np.broadcast_to(sp[None, :], (N, N))[off]

    L = np.zeros((N, N), dtype=complex)
    M = np.zeros_like(L)
    L[off] = dlp_kernel("helmholtz", 2, xi, yj, nj, k) * spj
    M[off] = single_kernel("helmholtz", 2, xi, yj, k) * spj
    ndoti = np.sum(nrm[:, None, :] * (X[None, :, :] - X[:, None, :]), axis=-1)
    E = np.exp(1j * k * ndoti)  # exp(ik n_i . (y_j - y_i))
    ndots = np.sum(nrm[None, :, :] * nrm[:, None, :], axis=-1)  # n_j . n_i

    A = grid.weight * (L - 1j * k * M)
    diag = -grid.weight * np.sum(
        np.where(off, E * (L - 1j * k * ndots * M), 0.0), axis=1
    )
    A[np.arange(N), np.arange(N)] = diag
    b = _sample_data(f, grid.points, grid.normals)
    x, residual = _dense_solve(A, b, "plane-wave-subtracted Nystrom")
    return Density2D(grid=grid, values=x, residual=residual)


# ---------------------------------------------------------------------------
# 3D Galerkin solvers on the sphere
# ---------------------------------------------------------------------------
_GALERKIN_PROBLEMS = (
    "laplace-dirichlet",
    "laplace-neumann",
    "helmholtz",
    "helmholtz-pws",
)


def solve_galerkin_3d(
    surface: Surface3D,
    problem: str,
    data: BoundaryData,
    k: Optional[float] = None,
    N: int = 16,
) -> DensitySH:
    """Spherical-harmonic Galerkin solve of the four boundary equations.

    The N^2 x N^2 system <Y_n'm', K[Y_nm]> psi_nm = <Y_n'm', data> is
    assembled with the product Gaussian rule; inner integrals are
    computed per collocation node on a grid rotated to put the node at
    the north pole. The Neumann case uses the adjoint operator with the
    [Y(x*) - Y(y)] subtraction (plus its identity part), which removes
    the kernel singularity altogether.
    """
    if not isinstance(surface, Surface3D):
        raise ValueError("solve_galerkin_3d supports spheres only")
    if problem not in _GALERKIN_PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if problem.startswith("helmholtz"):
        if k is None or not k > 0:
            raise ValueError("Helmholtz problems need a positive wavenumber")
    elif k is not None:
        raise ValueError("wavenumber given for a Laplace problem")
    if N < 2 or N > 24:
        raise ValueError(f"Galerkin order must lie in [2, 24], got {N}")

    # The outer projection integrates products of degree-(N-1) harmonics;
    # under the polar mapping s = pi (z+1)/2 that needs a rule of roughly
    # triple the basis order (at equal order the Gram error is O(1)).
    # Inner (weakly singular) integrals keep the order-N rotated rule.
    base = sphere_grid(3 * N)
    ss, tt = np.meshgrid(base.s, base.t, indexing="ij")
    s_out, t_out = ss.ravel(), tt.ravel()
    P = s_out.size  # collocation nodes of the projection rule
    nb = N * N  # basis size
    w_omega = base.weights.ravel()  # unit-sphere measure
    out_points = surface.point(s_out, t_out)
    out_normals = surface.normal(s_out, t_out)
    Yout = sph_harm_table(N, s_out, t_out)  # (P, nb)

    fvals = _sample_data(data, out_points, out_normals)
    rhs = (w_omega[:, None] * np.conj(Yout)).T @ fvals

    fam = "laplace" if problem.startswith("laplace") else "helmholtz"
    kk = k if fam == "helmholtz" else None

    inner = sphere_grid(N)
    iss, itt = np.meshgrid(inner.s, inner.t, indexing="ij")
    dirs = surface.unit_dir(iss.ravel(), itt.ravel())  # (Q, 3) base grid
    w_inner = inner.weights.ravel() * surface.radius**2  # area weights
    center = np.asarray(surface.center)

    M = np.zeros((nb, nb), dtype=complex)
    for lo in range(0, P, 64):
        hi = min(lo + 64, P)
        Bn = hi - lo
        R = _rotations_to_pole(out_normals[lo:hi])  # (B, 3, 3)
        rnrm = np.einsum("qk,bkm->bqm", dirs, R)  # rotated unit normals
        rpts = center + surface.radius * rnrm  # (B, Q, 3)
        theta = np.arccos(np.clip(rnrm[..., 2], -1.0, 1.0))
        phi = np.arctan2(rnrm[..., 1], rnrm[..., 0])
        T = sph_harm_table(N, theta.ravel(), phi.ravel()).reshape(Bn, -1, nb)

        xp = out_points[lo:hi, None, :]
        if problem == "laplace-neumann":
            # adjoint: integrate over x* = rotated nodes, target y = out node
            kern = adjoint_dlp_kernel(fam, 3, rpts, xp, rnrm)
            U = w_inner[None, :] * kern  # (B, Q)
            rows = np.einsum("bq,bqc->bc", U, T)
            rows -= (np.sum(U, axis=1) + 1.0)[:, None] * Yout[lo:hi]
            M += np.conj(rows).T @ (w_omega[lo:hi, None] * Yout[lo:hi])
            continue
        if problem in ("laplace-dirichlet", "helmholtz"):
            kern = dlp_kernel(fam, 3, xp, rpts, rnrm, kk)
            if problem == "helmholtz":
                kern = kern - 1j * k * single_kernel(fam, 3, xp, rpts, kk)
            rows = np.einsum("bq,bqc->bc", w_inner[None, :] * kern, T)
        else:  # helmholtz-pws
            L = dlp_kernel(fam, 3, xp, rpts, rnrm, k)
            S = single_kernel(fam, 3, xp, rpts, k)
            nstar = out_normals[lo:hi]
            E = np.exp(1j * k * np.einsum("bqm,bm->bq", rpts - xp, nstar))
            ndots = np.einsum("bqm,bm->bq", rnrm, nstar)
            u1 = w_inner[None, :] * (L - 1j * k * ndots * E * S)
            u2 = w_inner[None, :] * (1j * k * (ndots * E - 1.0) * S)
            u3 = w_inner[None, :] * (L * (1.0 - E))
            rows = np.einsum("bq,bqc->bc", u1 + u2, T)
            rows += (np.sum(u3, axis=1) - np.sum(u1, axis=1))[:, None] * Yout[lo:hi]
        M += (np.conj(Yout[lo:hi]) * w_omega[lo:hi, None]).T @ rows

    if problem == "laplace-dirichlet":
        M -= 0.5 * np.eye(nb)
    elif problem == "helmholtz":
        M += 0.5 * np.eye(nb)
    # laplace-neumann: the -1 identity is inside the adjoint row;
    # helmholtz-pws: the jump is absorbed by the subtraction.

    coef, residual = _dense_solve(M, rhs, f"Galerkin ({problem})")
    return DensitySH(surface=surface, order=N, coef=coef, residual=residual)


# ---------------------------------------------------------------------------
# Density interpolation and serialization
# ---------------------------------------------------------------------------
def density_interp(density: Union[Density2D, DensitySH], param):
    """Density value at an arbitrary boundary parameter.

    2D uses trigonometric interpolation of the nodal values (exact for
    band-limited data, nodal values reproduced exactly); 3D evaluates
    the spherical-harmonic expansion.
    """
    if isinstance(density, DensitySH):
        s, t = param
        return complex(density.eval_dirs(float(s), float(t)))
    N = density.N
    t = np.asarray(param, dtype=float)
    c = np.fft.fft(density.values) / N
    m = np.fft.fftfreq(N, 1.0 / N).astype(int)  # 0, 1, ..., -1
    phases = np.exp(1j * np.multiply.outer(t, m.astype(float)))
    if N % 2 == 0:
        ny = N // 2
        phases[..., ny] = np.cos(ny * t)
    vals = phases @ c
    return complex(vals) if vals.ndim == 0 else vals


def save_density(density: Union[Density2D, DensitySH], path: str) -> None:
    """Write a density (with its boundary) to a JSON sidecar."""
    if isinstance(density, Density2D):
        curve = density.curve
        doc = {
            "kind": "ptr2d",
            "curve": {
                "kind": curve.kind,
                "cos_coef": list(curve.cos_coef),
                "sin_coef": list(curve.sin_coef),
            },
            "N": density.N,
            "values_re": density.values.real.tolist(),
            "values_im": density.values.imag.tolist(),
            "residual": density.residual,
        }
    else:
        doc = {
            "kind": "sh3d",
            "surface": {
                "center": list(density.surface.center),
                "radius": density.surface.radius,
            },
            "order": density.order,
            "coef_re": density.coef.real.tolist(),
            "coef_im": density.coef.imag.tolist(),
            "residual": density.residual,
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_density(path: str) -> Union[Density2D, DensitySH]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc["kind"] == "ptr2d":
        curve = Curve2D(
            kind=doc["curve"]["kind"],
            cos_coef=tuple(doc["curve"]["cos_coef"]),
            sin_coef=tuple(doc["curve"]["sin_coef"]),
        )
        values = np.asarray(doc["values_re"]) + 1j * np.asarray(doc["values_im"])
        return Density2D(
            grid=curve_grid(curve, int(doc["N"])),
            values=values,
            residual=float(doc.get("residual", 0.0)),
        )
    if doc["kind"] == "sh3d":
        surf = Surface3D(
            center=tuple(doc["surface"]["center"]),
            radius=float(doc["surface"]["radius"]),
        )
        coef = np.asarray(doc["coef_re"]) + 1j * np.asarray(doc["coef_im"])
        return DensitySH(
            surface=surf,
            order=int(doc["order"]),
            coef=coef,
            residual=float(doc.get("residual", 0.0)),
        )
    raise ValueError(f"unknown density kind {doc.get('kind')!r}")
