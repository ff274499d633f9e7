"""Parameterized 2D curves and 3D spherical surfaces.

Boundaries carry analytic first and second derivatives, so normals,
Jacobians and curvatures have no finite-difference error in them. 2D
curves are closed, C^2 and counterclockwise with parameter t in
[0, 2pi); the unit normal n = (y2', -y1')/|y'| then points outward.
3D surfaces use polar/azimuthal angles (s, t) in [0, pi] x [-pi, pi]
and the area element J(s, t) sin(s) ds dt with J = |y_s x y_t|/sin(s).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

__all__ = [
    "Curve2D",
    "Surface3D",
    "BoundarySample",
    "CurveGrid",
    "circle",
    "kite",
    "star",
    "fourier_curve",
    "sphere",
    "parse_shape",
    "boundary_sample",
    "curve_grid",
    "offset_point",
    "nearest_boundary_point",
    "rotate_to_pole",
]

_COARSE_SEEDS = 2048  # >= 4N for every solver resolution used here (N <= 512)


# ---------------------------------------------------------------------------
# Boundary types
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Curve2D:
    """Closed smooth plane curve y(t), t in [0, 2pi), counterclockwise.

    Two families are supported: the fixed kite shape
    y(t) = (cos t + 0.65 cos 2t - 0.65, 1.5 sin t), and radial Fourier
    curves y(t) = rho(t) (cos t, sin t) with
    rho(t) = sum_j a_j cos(jt) + sum_j b_j sin(jt). Circles and the
    five-lobed star are radial Fourier curves.
    """

    kind: str  # circle | kite | star | fourier
    cos_coef: Tuple[float, ...] = ()  # radial cosine coefficients (a0, a1, ...)
    sin_coef: Tuple[float, ...] = ()  # radial sine coefficients (b1, b2, ...)

    dim = 2

    def __post_init__(self):
        coefs = self.cos_coef + self.sin_coef
        if not all(math.isfinite(c) for c in coefs):
            raise ValueError(f"non-finite shape parameters: {coefs}")
        if self.kind != "kite":
            t = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
            rho = self._rho(t)
            if np.min(rho) <= 0.0:
                raise ValueError(
                    f"radial curve must satisfy rho(t) > 0 (min {np.min(rho):.3g})"
                )

    def _rho(self, t, order: int = 0):
        """Radial function rho(t) or its order-th derivative."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for j, a in enumerate(self.cos_coef):
            c = a * j**order
            if c != 0.0:
                out += c * np.cos(t * j + 0.5 * np.pi * order)
        for j, b in enumerate(self.sin_coef, start=1):
            c = b * j**order
            if c != 0.0:
                out += c * np.sin(t * j + 0.5 * np.pi * order)
        return out

    def point(self, t):
        """Boundary point y(t); t may be any array shape, result (..., 2)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "kite":
            return np.stack(
                [np.cos(t) + 0.65 * np.cos(2 * t) - 0.65, 1.5 * np.sin(t)], axis=-1
            )
        rho = self._rho(t)
        return np.stack([rho * np.cos(t), rho * np.sin(t)], axis=-1)

    def velocity(self, t):
        """First derivative y'(t), shape (..., 2)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "kite":
            return np.stack(
                [-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t)], axis=-1
            )
        rho, drho = self._rho(t), self._rho(t, 1)
        ct, st = np.cos(t), np.sin(t)
        return np.stack([drho * ct - rho * st, drho * st + rho * ct], axis=-1)

    def acceleration(self, t):
        """Second derivative y''(t), shape (..., 2)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "kite":
            return np.stack(
                [-np.cos(t) - 2.6 * np.cos(2 * t), -1.5 * np.sin(t)], axis=-1
            )
        rho, drho, ddrho = self._rho(t), self._rho(t, 1), self._rho(t, 2)
        ct, st = np.cos(t), np.sin(t)
        return np.stack(
            [
                ddrho * ct - 2 * drho * st - rho * ct,
                ddrho * st + 2 * drho * ct - rho * st,
            ],
            axis=-1,
        )

    def speed(self, t):
        return np.linalg.norm(self.velocity(t), axis=-1)

    def normal(self, t):
        """Outward unit normal, shape (..., 2)."""
        v = self.velocity(t)
        return np.stack([v[..., 1], -v[..., 0]], axis=-1) / np.linalg.norm(
            v, axis=-1, keepdims=True
        )

    def curvature(self, t):
        """Signed curvature (positive for a counterclockwise circle)."""
        v, a = self.velocity(t), self.acceleration(t)
        sp = np.linalg.norm(v, axis=-1)
        return (v[..., 0] * a[..., 1] - v[..., 1] * a[..., 0]) / sp**3

    def interior_point(self) -> np.ndarray:
        """Area centroid (Green's theorem); lies inside every built-in shape."""
        t = np.linspace(0.0, 2.0 * np.pi, 1024, endpoint=False)
        y, v = self.point(t), self.velocity(t)
        h = 2.0 * np.pi / t.size
        area = 0.5 * h * np.sum(y[:, 0] * v[:, 1] - y[:, 1] * v[:, 0])
        cx = 0.5 * h * np.sum(y[:, 0] ** 2 * v[:, 1]) / area
        cy = -0.5 * h * np.sum(y[:, 1] ** 2 * v[:, 0]) / area
        return np.array([cx, cy])

    def diameter(self) -> float:
        t = np.linspace(0.0, 2.0 * np.pi, 512, endpoint=False)
        y = self.point(t)
        return float(np.ptp(y[:, 0]) ** 2 + np.ptp(y[:, 1]) ** 2) ** 0.5

    def contains(self, x) -> bool:
        """Even-odd crossing test against a dense polygonal sampling."""
        t = np.linspace(0.0, 2.0 * np.pi, _COARSE_SEEDS, endpoint=False)
        p = self.point(t)
        q = np.roll(p, -1, axis=0)
        x = np.asarray(x, dtype=float)
        cond = (p[:, 1] > x[1]) != (q[:, 1] > x[1])
        with np.errstate(divide="ignore", invalid="ignore"):
            xs = p[:, 0] + (x[1] - p[:, 1]) * (q[:, 0] - p[:, 0]) / (q[:, 1] - p[:, 1])
        return bool(np.sum(cond & (x[0] < xs)) % 2 == 1)


@dataclass(frozen=True)
class Surface3D:
    """Sphere of given center and radius, parameterized by (s, t).

    y(s, t) = center + r (sin s cos t, sin s sin t, cos s); the Jacobian
    J = |y_s x y_t| / sin(s) equals r^2 everywhere, including the poles
    (by the limit).
    """

    kind: str = "sphere"
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 1.0

    dim = 3

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValueError(f"sphere radius must be positive, got {self.radius}")
        if not all(math.isfinite(c) for c in self.center):
            raise ValueError(f"non-finite sphere center: {self.center}")

    def unit_dir(self, s, t):
        s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
        ss = np.sin(s)
        return np.stack([ss * np.cos(t), ss * np.sin(t), np.cos(s)], axis=-1)

    def point(self, s, t):
        return np.asarray(self.center) + self.radius * self.unit_dir(s, t)

    def normal(self, s, t):
        return self.unit_dir(s, t)

    def jacobian(self, s, t):
        s = np.asarray(s, dtype=float)
        return np.full(s.shape, self.radius**2)

    def interior_point(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def diameter(self) -> float:
        return 2.0 * self.radius


Boundary = Union[Curve2D, Surface3D]


@dataclass(frozen=True)
class BoundarySample:
    """Geometry of one boundary point: the anchor x* of close evaluations."""

    boundary: Boundary
    param: Union[float, Tuple[float, float]]
    point: np.ndarray
    normal: np.ndarray
    jacobian: float
    tangent: Optional[np.ndarray] = None  # 2D only: unit y'/|y'|
    curvature: Optional[float] = None  # 2D only


@dataclass(frozen=True)
class CurveGrid:
    """All geometric data of a curve sampled on the N-point PTR grid."""

    curve: Curve2D
    N: int
    t: np.ndarray  # (N,) nodes 2 pi j / N
    points: np.ndarray  # (N, 2)
    normals: np.ndarray  # (N, 2)
    speeds: np.ndarray  # (N,) |y'|
    curvatures: np.ndarray  # (N,)

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.N


# ---------------------------------------------------------------------------
# Constructors and the CLI shape grammar
# ---------------------------------------------------------------------------
def circle(radius: float = 1.0) -> Curve2D:
    return Curve2D(kind="circle", cos_coef=(float(radius),))


def kite() -> Curve2D:
    return Curve2D(kind="kite")


def star() -> Curve2D:
    return Curve2D(kind="star", cos_coef=(1.55, 0.0, 0.0, 0.0, 0.0, 0.4))


def fourier_curve(cos_coef, sin_coef=()) -> Curve2D:
    return Curve2D(
        kind="fourier",
        cos_coef=tuple(float(c) for c in cos_coef),
        sin_coef=tuple(float(c) for c in sin_coef),
    )


def sphere(radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> Surface3D:
    return Surface3D(center=tuple(float(c) for c in center), radius=float(radius))


def parse_shape(spec: str) -> Boundary:
    """Parse a shape string: circle:r, kite, star, sphere:r,
    fourier:[a0,a1,...;b1,...]."""
    spec = spec.strip()
    name, _, arg = spec.partition(":")
    name = name.lower()
    if name == "kite":
        return kite()
    if name == "star":
        return star()
    if name == "circle":
        return circle(float(arg) if arg else 1.0)
    if name == "sphere":
        return sphere(float(arg) if arg else 1.0)
    if name == "fourier":
        body = arg.strip().lstrip("[").rstrip("]")
        parts = body.split(";")
        cos_coef = [float(v) for v in parts[0].split(",") if v.strip()]
        sin_coef = (
            [float(v) for v in parts[1].split(",") if v.strip()]
            if len(parts) > 1
            else []
        )
        return fourier_curve(cos_coef, sin_coef)
    raise ValueError(f"unknown shape spec {spec!r}")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------
def boundary_sample(boundary: Boundary, param) -> BoundarySample:
    """Evaluate point, outward unit normal and Jacobian at one parameter.

    Parameters wrap periodically. For spheres the Jacobian at the poles
    is the limit value r^2.
    """
    if isinstance(boundary, Curve2D):
        t = float(param) % (2.0 * np.pi)
        v = boundary.velocity(t)
        sp = float(np.linalg.norm(v))
        return BoundarySample(
            boundary=boundary,
            param=t,
            point=boundary.point(t),
            normal=np.array([v[1], -v[0]]) / sp,
            jacobian=sp,
            tangent=v / sp,
            curvature=float(boundary.curvature(t)),
        )
    s, t = (float(param[0]), float(param[1]))
    return BoundarySample(
        boundary=boundary,
        param=(s, t),
        point=boundary.point(s, t),
        normal=boundary.normal(s, t),
        jacobian=boundary.radius**2,
    )


def curve_grid(curve: Curve2D, N: int) -> CurveGrid:
    """Sample a curve on the N-point PTR grid t_j = 2 pi j / N."""
    if N < 2:
        raise ValueError(f"grid needs N >= 2, got {N}")
    t = 2.0 * np.pi * np.arange(N) / N
    v = curve.velocity(t)
    sp = np.linalg.norm(v, axis=-1)
    normals = np.stack([v[:, 1], -v[:, 0]], axis=-1) / sp[:, None]
    return CurveGrid(
        curve=curve,
        N=N,
        t=t,
        points=curve.point(t),
        normals=normals,
        speeds=sp,
        curvatures=curve.curvature(t),
    )


def offset_point(sample: BoundarySample, ell: float, side: str) -> np.ndarray:
    """Point at distance ell from x* along the normal: x* -/+ ell n."""
    if not ell > 0.0:
        raise ValueError(f"offset distance must be positive, got {ell}")
    if side == "interior":
        return sample.point - ell * sample.normal
    if side == "exterior":
        return sample.point + ell * sample.normal
    raise ValueError(f"side must be 'interior' or 'exterior', got {side!r}")


# ---------------------------------------------------------------------------
# Closest-point projection
# ---------------------------------------------------------------------------
def nearest_boundary_point(boundary: Boundary, x):
    """Globally nearest boundary parameter, distance and side of x.

    Returns
    -------
    (param, distance, side) with side in {"interior", "exterior"}.

    2D curves use a dense coarse scan followed by damped Newton on the
    squared distance; spheres are handled analytically. Raises if x lies
    on the boundary to within 1e-13 of the diameter.
    """
    x = np.asarray(x, dtype=float)
    tol_on = 1e-13 * boundary.diameter()

    if isinstance(boundary, Surface3D):
        d = x - np.asarray(boundary.center)
        rx = float(np.linalg.norm(d))
        if abs(rx - boundary.radius) <= tol_on:
            raise ValueError(f"point {x} lies on the boundary")
        if rx == 0.0:
            return (0.0, 0.0), boundary.radius, "interior"
        s = float(np.arccos(np.clip(d[2] / rx, -1.0, 1.0)))
        t = float(np.arctan2(d[1], d[0]))
        side = "exterior" if rx > boundary.radius else "interior"
        return (s, t), abs(rx - boundary.radius), side

    ts = np.linspace(0.0, 2.0 * np.pi, _COARSE_SEEDS, endpoint=False)
    d2 = np.sum((boundary.point(ts) - x) ** 2, axis=-1)
    t0 = float(ts[np.argmin(d2)])

    # damped Newton on g(t) = |x - y(t)|^2
    t, converged = t0, False
    g = float(np.sum((boundary.point(t) - x) ** 2))
    for _ in range(50):
        y, v, a = boundary.point(t), boundary.velocity(t), boundary.acceleration(t)
        dg = 2.0 * float(np.dot(y - x, v))
        ddg = 2.0 * float(np.dot(v, v) + np.dot(y - x, a))
        if ddg <= 0.0:
            ddg = 2.0 * float(np.dot(v, v))
        step = -dg / ddg
        while abs(step) > 1e-16:
            g_new = float(np.sum((boundary.point(t + step) - x) ** 2))
            if g_new <= g + 1e-30:
                break
            step *= 0.5
        t, g = t + step, float(np.sum((boundary.point(t + step) - x) ** 2))
        if abs(step) < 1e-14:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"closest-point Newton did not converge near t={t0:.6f}; "
            "falling back to the coarse sample",
            RuntimeWarning,
        )
        t = t0

    t = t % (2.0 * np.pi)
    xs = boundary.point(t)
    dist = float(np.linalg.norm(x - xs))
    if dist <= tol_on:
        raise ValueError(f"point {x} lies on the boundary (distance {dist:.3g})")
    v = boundary.velocity(t)
    n = np.array([v[1], -v[0]]) / np.linalg.norm(v)
    dot = float(np.dot(x - xs, n))
    if abs(dot) >= 0.1 * dist:
        side = "exterior" if dot > 0.0 else "interior"
    else:
        # nearly tangential offset (beyond reach): fall back to crossing count
        side = "interior" if boundary.contains(x) else "exterior"
    return t, dist, side


# ---------------------------------------------------------------------------
# Sphere rotation
# ---------------------------------------------------------------------------
def rotate_to_pole(surface: Surface3D, xstar: BoundarySample) -> np.ndarray:
    """Rotation R (det 1) taking (x* - center)/r to the north pole e3.

    The composed parameterization y_R(s, t) = center + r R^T u(s, t)
    places x* at s = 0. Returns the identity when x* already sits at the
    north pole.
    """
    if not isinstance(surface, Surface3D):
        raise ValueError("rotate_to_pole expects a sphere")
    u = (xstar.point - np.asarray(surface.center)) / surface.radius
    e3 = np.array([0.0, 0.0, 1.0])
    axis = np.cross(u, e3)
    s = float(np.linalg.norm(axis))
    c = float(np.dot(u, e3))
    if s < 1e-14:
        if c > 0.0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])  # pi turn about e1
    axis = axis / s
    K = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)
