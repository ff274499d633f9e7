"""Quadrature rules for layer potentials.

2D: the Periodic Trapezoid Rule (spectral for smooth periodic
integrands) and Kress' product quadrature for kernels of the form

    K(t, t*) = K1(t, t*) log(4 sin^2((t* - t)/2)) + K2(t, t*)

with smooth K1, K2. The weights applied to the log factor are

    R_k(t*) = -(4 pi / N) sum_{j=1}^{N/2-1} cos(j (t* - t_k)) / j
              - (4 pi / N^2) cos((N/2)(t* - t_k)),

exact for trigonometric polynomials of degree N/2 against the log
kernel. K1/K2 for the Laplace and Helmholtz kernels are derived from the
small-argument series of H1_0, H1_1; the diagonal values of K2 carry the
curvature limit of the double-layer kernel and the Euler-Mascheroni /
log(k |y'| / 2) constants of the single layer.

3D: the product Gaussian rule on the sphere (Gauss-Legendre in the
polar angle s mapped to (0, pi), PTR in the azimuth t) and the
three-step close-evaluation rule: rotate the target's nearest boundary
point to the north pole, then integrate on the rotated grid, where the
sin(s) factor of the area element suppresses the nearly singular peak.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import (
    BoundarySample,
    CurveGrid,
    Surface3D,
    rotate_to_pole,
)
from .specfun import (
    EULER_GAMMA,
    GLRule,
    bessel_j0,
    bessel_j1,
    gauss_legendre,
    hankel1,
)

__all__ = [
    "PTRGrid",
    "ptr_grid",
    "ptr_integrate",
    "KressWeights",
    "kress_weights",
    "kress_log_matrix",
    "slp_split",
    "dlp_split",
    "kress_split_helmholtz",
    "SphereGrid",
    "sphere_grid",
    "sphere_integrate",
    "RotatedSphereGrid",
    "rotated_sphere_grid",
    "three_step_eval",
]


# ---------------------------------------------------------------------------
# Periodic trapezoid rule
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PTRGrid:
    """Uniform periodic grid t_j = 2 pi j / N with weight 2 pi / N."""

    N: int
    nodes: np.ndarray

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.N


def ptr_grid(N: int) -> PTRGrid:
    if N < 2:
        raise ValueError(f"PTR needs N >= 2, got {N}")
    return PTRGrid(N=N, nodes=2.0 * np.pi * np.arange(N) / N)


def ptr_integrate(values) -> complex:
    """(2 pi / N) sum of nodal values over one period."""
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("ptr_integrate needs at least one nodal value")
    return complex(2.0 * np.pi / values.shape[-1] * np.sum(values, axis=-1))


# ---------------------------------------------------------------------------
# Kress weights for the periodic log kernel
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class KressWeights:
    """Weights R_k(t*) applied to K1 against log(4 sin^2((t* - t)/2))."""

    N: int
    tstar: float
    weights: np.ndarray  # (N,)


def _kress_r(N: int, delta: np.ndarray) -> np.ndarray:
    """R at node offsets delta = t* - t_k, vectorized."""
    n = N // 2
    out = np.zeros_like(delta, dtype=float)
    for j in range(1, n):
        out -= np.cos(j * delta) / j
    out *= 4.0 * np.pi / N
    out -= (4.0 * np.pi / N**2) * np.cos(n * delta)
    return out


def kress_weights(N: int, tstar: float) -> KressWeights:
    """Log-kernel quadrature weights for an arbitrary target t*."""
    if N < 4 or N % 2 != 0:
        raise ValueError(f"Kress weights need even N >= 4, got {N}")
    tk = 2.0 * np.pi * np.arange(N) / N
    return KressWeights(N=N, tstar=float(tstar), weights=_kress_r(N, tstar - tk))


def kress_log_matrix(N: int) -> np.ndarray:
    """Circulant matrix R[i, j] = R_j(t_i) for Nystrom collocation."""
    if N < 4 or N % 2 != 0:
        raise ValueError(f"Kress weights need even N >= 4, got {N}")
    r = _kress_r(N, 2.0 * np.pi * np.arange(N) / N)
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return r[idx]


# ---------------------------------------------------------------------------
# Logarithmic splits of the 2D kernels
# ---------------------------------------------------------------------------
def _pairwise(grid: CurveGrid, ts):
    """Geometry between targets y(ts) and all grid nodes.

    Returns (delta, sinfac, logfac, dx, r, ndot, diag_mask) with shapes
    (M, N); diag marks target/node coincidences (wrapped)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    delta = ts[:, None] - grid.t[None, :]
    half = 0.5 * delta
    sinfac = 4.0 * np.sin(half) ** 2
    X = grid.curve.point(ts)
    dx = X[:, None, :] - grid.points[None, :, :]  # x* - y_j
    r = np.linalg.norm(dx, axis=-1)
    ndot = np.sum(grid.normals[None, :, :] * dx, axis=-1)  # n_j . (x* - y_j)
    diag = np.abs(np.remainder(delta + np.pi, 2.0 * np.pi) - np.pi) < 1e-12
    with np.errstate(divide="ignore"):
        logfac = np.where(diag, 0.0, np.log(np.where(diag, 1.0, sinfac)))
    return ts, delta, sinfac, logfac, dx, r, ndot, diag


def slp_split(grid: CurveGrid, family: str, k, ts):
    """Split M = M1 log(4 sin^2((t*-t)/2)) + M2 of the single-layer kernel
    G(x*, y(t)) |y'(t)| for targets x* = y(ts).

    Returns (M1, M2) of shape (M, N); rows where ts hits a node carry the
    analytic diagonal limits.
    """
    ts, delta, sinfac, logfac, dx, r, ndot, diag = _pairwise(grid, ts)
    sp = grid.speeds[None, :]
    rsafe = np.where(diag, 1.0, r)
    if family == "laplace":
        m1 = np.broadcast_to(-sp / (4.0 * np.pi), r.shape).copy()
        full = -np.log(rsafe) / (2.0 * np.pi) * sp + 0.0j
        m2 = np.where(diag, 0.0, full - m1 * logfac)
        m2[diag] = (-np.log(grid.speeds) / (2.0 * np.pi) * grid.speeds)[
            np.nonzero(diag)[1]
        ]
        return m1 + 0.0j, m2
    z = k * rsafe
    m1 = -bessel_j0(np.where(diag, 1.0, z)) / (4.0 * np.pi) * sp
    m1[diag] = (-grid.speeds / (4.0 * np.pi))[np.nonzero(diag)[1]]
    full = 0.25j * hankel1(0, np.where(diag, 1.0, z)) * sp
    m2 = np.where(diag, 0.0, full - m1 * logfac)
    jdiag = np.nonzero(diag)[1]
    m2[diag] = (
        0.25j - (np.log(0.5 * k * grid.speeds[jdiag]) + EULER_GAMMA) / (2.0 * np.pi)
    ) * grid.speeds[jdiag]
    return m1 + 0.0j, m2


def dlp_split(grid: CurveGrid, family: str, k, ts):
    """Split L = L1 log(4 sin^2((t*-t)/2)) + L2 of the double-layer kernel
    dG/dn_y (x*, y(t)) |y'(t)|; L1 = 0 for Laplace.

    The shared diagonal limit of L2 is the curvature term
    -kappa(t*) |y'(t*)| / (4 pi).
    """
    ts, delta, sinfac, logfac, dx, r, ndot, diag = _pairwise(grid, ts)
    sp = grid.speeds[None, :]
    jdiag = np.nonzero(diag)[1]
    curv_diag = (-grid.curvatures * grid.speeds / (4.0 * np.pi))[jdiag]
    rsafe = np.where(diag, 1.0, r)
    if family == "laplace":
        l1 = np.zeros_like(r) + 0.0j
        l2 = np.where(diag, 0.0, ndot / (2.0 * np.pi * rsafe**2) * sp) + 0.0j
        l2[diag] = curv_diag
        return l1, l2
    z = k * rsafe
    xi = -ndot / rsafe  # n_j . (y_j - x*) / r
    l1 = np.where(diag, 0.0, k / (4.0 * np.pi) * bessel_j1(np.where(diag, 1.0, z)) * xi * sp)
    full = 0.25j * k * hankel1(1, np.where(diag, 1.0, z)) * (ndot / rsafe) * sp
    l2 = np.where(diag, 0.0, full - l1 * logfac)
    l2[diag] = curv_diag
    return l1 + 0.0j, l2


def kress_split_helmholtz(grid: CurveGrid, k: float, ts):
    """Split of the combined sound-soft kernel
    [dG_H/dn_y - ik G_H](x*, y(t)) |y'(t)| into (K1, K2)."""
    l1, l2 = dlp_split(grid, "helmholtz", k, ts)
    m1, m2 = slp_split(grid, "helmholtz", k, ts)
    return l1 - 1j * k * m1, l2 - 1j * k * m2


# ---------------------------------------------------------------------------
# Product Gaussian quadrature on the sphere
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SphereGrid:
    """Tensor rule: N Gauss-Legendre polar nodes s_i = pi (z_i + 1)/2 and
    2N azimuthal PTR nodes t_j = -pi + pi (j - 1)/N."""

    N: int
    rule: GLRule
    s: np.ndarray  # (N,)
    t: np.ndarray  # (2N,)
    weights: np.ndarray  # (N, 2N): pi^2/(2N) w_i sin(s_i)


def sphere_grid(N: int) -> SphereGrid:
    if N < 2:
        raise ValueError(f"sphere grid needs N >= 2, got {N}")
    rule = gauss_legendre(N)
    s = 0.5 * np.pi * (rule.nodes + 1.0)
    t = -np.pi + np.pi * np.arange(2 * N) / N
    w = (np.pi**2 / (2.0 * N)) * rule.weights * np.sin(s)
    return SphereGrid(N=N, rule=rule, s=s, t=t, weights=np.repeat(w[:, None], 2 * N, axis=1))


def sphere_integrate(grid: SphereGrid, surface: Surface3D, values) -> complex:
    """Surface integral: sum of weights * J * values over the grid."""
    values = np.asarray(values)
    if values.shape != grid.weights.shape:
        raise ValueError(
            f"value grid shape {values.shape} does not match rule shape "
            f"{grid.weights.shape}"
        )
    ss, tt = np.meshgrid(grid.s, grid.t, indexing="ij")
    return complex(np.sum(grid.weights * surface.jacobian(ss, tt) * values))


# ---------------------------------------------------------------------------
# Three-step close evaluation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RotatedSphereGrid:
    """Sphere grid rotated so a chosen boundary point sits at s = 0."""

    surface: Surface3D
    xstar: BoundarySample
    rotation: np.ndarray  # (3, 3)
    base: SphereGrid
    points: np.ndarray  # (P, 3), P = 2 N^2
    normals: np.ndarray  # (P, 3)
    weights: np.ndarray  # (P,), includes the Jacobian


def rotated_sphere_grid(
    surface: Surface3D, xstar: BoundarySample, N: int
) -> RotatedSphereGrid:
    if not isinstance(surface, Surface3D):
        raise ValueError("the three-step rule supports spheres only")
    R = rotate_to_pole(surface, xstar)
    base = sphere_grid(N)
    ss, tt = np.meshgrid(base.s, base.t, indexing="ij")
    dirs = surface.unit_dir(ss.ravel(), tt.ravel())  # (P, 3)
    normals = dirs @ R  # R^T u, rows
    points = np.asarray(surface.center) + surface.radius * normals
    w = base.weights.ravel() * surface.radius**2
    return RotatedSphereGrid(
        surface=surface,
        xstar=xstar,
        rotation=R,
        base=base,
        points=points,
        normals=normals,
        weights=w,
    )


def three_step_eval(
    surface: Surface3D,
    integrand: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    xstar: BoundarySample,
    x,
    N: int,
) -> complex:
    """Integrate integrand(x, points, normals) over the sphere with the
    target's nearest boundary point rotated to the north pole.

    The caller supplies the full surface integrand (kernel times density
    resampled at the rotated nodes); the area element and weights are
    applied here.
    """
    grid = rotated_sphere_grid(surface, xstar, N)
    vals = integrand(np.asarray(x, dtype=float), grid.points, grid.normals)
    return complex(np.sum(grid.weights * vals))
