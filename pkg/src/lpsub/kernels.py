"""Fundamental solutions of Laplace and Helmholtz and their normal
derivatives, in 2D and 3D.

    G_L(x, y) = -log|x - y| / (2 pi)            (2D)
              = 1 / (4 pi |x - y|)              (3D)
    G_H(x, y) = (i/4) H1_0(k |x - y|)           (2D)
              = exp(ik|x - y|) / (4 pi |x - y|) (3D)

All values are returned complex (Laplace with zero imaginary part) so a
single evaluation pipeline serves both families. The analytic
normal-derivative formulas have their signs pinned by finite-difference
tests against the corresponding single kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .specfun import hankel1

__all__ = [
    "KernelSpec",
    "kernel_eval",
    "single_kernel",
    "dlp_kernel",
    "adjoint_dlp_kernel",
]


@dataclass(frozen=True)
class KernelSpec:
    """Selects an equation family, dimension, and kernel part."""

    family: str  # laplace | helmholtz
    dim: int  # 2 | 3
    k: Optional[float] = None  # wavenumber, Helmholtz only
    part: str = "single"  # single | dlp | adjoint-dlp

    def __post_init__(self):
        if self.family not in ("laplace", "helmholtz"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.dim not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dim}")
        if self.part not in ("single", "dlp", "adjoint-dlp"):
            raise ValueError(f"unknown kernel part {self.part!r}")
        if (self.family == "helmholtz") != (self.k is not None):
            raise ValueError("wavenumber k must be given iff family is helmholtz")
        if self.k is not None and not self.k > 0:
            raise ValueError(f"wavenumber must be positive, got {self.k}")


def _radii(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - y
    r = np.linalg.norm(dx, axis=-1)
    return dx, r


def single_kernel(family, dim, x, y, k=None):
    """G(x, y); broadcasts over leading axes of x, y (..., dim)."""
    dx, r = _radii(x, y)
    if np.any(r == 0.0):
        raise ValueError("kernel evaluated at coincident points x = y")
    if family == "laplace":
        if dim == 2:
            return -np.log(r) / (2.0 * np.pi) + 0.0j
        return 1.0 / (4.0 * np.pi * r) + 0.0j
    if dim == 2:
        return 0.25j * hankel1(0, k * r)
    return np.exp(1j * k * r) / (4.0 * np.pi * r)


def dlp_kernel(family, dim, x, y, ny, k=None):
    """Normal derivative at the source point, d G(x, y) / d n_y."""
    dx, r = _radii(x, y)
    if np.any(r == 0.0):
        raise ValueError("kernel evaluated at coincident points x = y")
    ndot = np.sum(np.asarray(ny, dtype=float) * dx, axis=-1)  # n_y . (x - y)
    if family == "laplace":
        if dim == 2:
            return ndot / (2.0 * np.pi * r**2) + 0.0j
        return ndot / (4.0 * np.pi * r**3) + 0.0j
    if dim == 2:
        return 0.25j * k * hankel1(1, k * r) * ndot / r
    return (ndot / r) * (1.0 / r - 1j * k) * np.exp(1j * k * r) / (4.0 * np.pi * r)


def adjoint_dlp_kernel(family, dim, x, y, nx, k=None):
    """Normal derivative at the target point, d G(x, y) / d n_x."""
    dx, r = _radii(x, y)
    if np.any(r == 0.0):
        raise ValueError("kernel evaluated at coincident points x = y")
    ndot = np.sum(np.asarray(nx, dtype=float) * dx, axis=-1)  # n_x . (x - y)
    if family == "laplace":
        if dim == 2:
            return -ndot / (2.0 * np.pi * r**2) + 0.0j
        return -ndot / (4.0 * np.pi * r**3) + 0.0j
    if dim == 2:
        return -0.25j * k * hankel1(1, k * r) * ndot / r
    return -(ndot / r) * (1.0 / r - 1j * k) * np.exp(1j * k * r) / (4.0 * np.pi * r)


def kernel_eval(spec: KernelSpec, x, y, n=None) -> complex:
    """Evaluate the kernel selected by spec at a single (x, y[, n])."""
    if spec.part != "single":
        if n is None:
            raise ValueError(f"kernel part {spec.part!r} needs a unit normal")
        n = np.asarray(n, dtype=float)
    if spec.part == "single":
        return complex(single_kernel(spec.family, spec.dim, x, y, spec.k))
    if spec.part == "dlp":
        return complex(dlp_kernel(spec.family, spec.dim, x, y, n, spec.k))
    return complex(adjoint_dlp_kernel(spec.family, spec.dim, x, y, n, spec.k))
