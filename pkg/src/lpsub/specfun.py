"""Special functions: Gauss-Legendre rules, Bessel/Hankel J0/J1/Y0/Y1,
and orthonormal spherical harmonics.

Bessel functions are evaluated by the ascending power series below
z = 16 and by the Hankel asymptotic expansion above. The series is summed
in extended precision (numpy longdouble) because its alternating terms
grow to ~1e5 before cancelling near the split point; in double precision
that would cost five digits. The split at 16 keeps the asymptotic
truncation floor (~exp(-2z)) below 1e-13.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GLRule",
    "gauss_legendre",
    "bessel_j0",
    "bessel_j1",
    "bessel_y0",
    "bessel_y1",
    "hankel1",
    "sph_harm",
    "sph_harm_table",
    "sph_index",
    "EULER_GAMMA",
]

EULER_GAMMA = 0.5772156649015328606065

_SPLIT = 16.0  # series below, asymptotic expansion above
_SERIES_TERMS = 64


# ---------------------------------------------------------------------------
# Gauss-Legendre
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GLRule:
    """N-point Gauss-Legendre rule on (-1, 1)."""

    order: int
    nodes: np.ndarray  # (N,), strictly increasing, symmetric about 0
    weights: np.ndarray  # (N,), sum to 2


def gauss_legendre(n: int) -> GLRule:
    """Nodes and weights of the N-point Gauss-Legendre rule.

    The nodes are the roots of the degree-N Legendre polynomial, found
    by Newton iteration from the Chebyshev-type initial guesses
    cos(pi (i - 1/4)/(N + 1/2)); the rule integrates polynomials of
    degree <= 2N - 1 exactly.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"rule order must be a positive integer, got {n}")
    if n > 512:
        raise ValueError(f"rule order capped at 512, got {n}")
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        # Legendre recurrence for P_n and P_{n-1} at x
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        if n == 1:
            p1, p0 = x, np.ones_like(x)
        dp = n * (x * p1 - p0) / (x**2 - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    # final derivative at the converged nodes
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if n == 1:
        p1, p0 = x, np.ones_like(x)
    dp = n * (x * p1 - p0) / (x**2 - 1.0)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    order = np.argsort(x)
    return GLRule(order=n, nodes=x[order], weights=w[order])


# ---------------------------------------------------------------------------
# Bessel functions of orders 0 and 1 for real z > 0
# ---------------------------------------------------------------------------
def _series_j0_j1(z):
    """J0 and J1 by the ascending series, summed in longdouble."""
    q = -np.square(z.astype(np.longdouble) / 2.0)  # -z^2/4
    t0 = np.ones_like(q)
    t1 = z.astype(np.longdouble) / 2.0
    j0 = t0.copy()
    j1 = t1.copy()
    for m in range(1, _SERIES_TERMS):
        t0 = t0 * q / (m * m)
        t1 = t1 * q / (m * (m + 1))
        j0 += t0
        j1 += t1
    return j0, j1


def _series_y0_y1(z, j0, j1):
    """Y0 and Y1 companion series (longdouble), given J0, J1."""
    zl = z.astype(np.longdouble)
    q = -np.square(zl / 2.0)
    lg = np.log(zl / 2.0)
    # Y0 = (2/pi)[(log(z/2) + gamma) J0 + sum_{m>=1} (-1)^{m+1} H_m (z^2/4)^m / (m!)^2]
    t = np.ones_like(q)
    s0 = np.zeros_like(q)
    h = np.longdouble(0.0)
    for m in range(1, _SERIES_TERMS):
        t = t * q / (m * m)  # (-1)^m (z^2/4)^m / (m!)^2
        h = h + np.longdouble(1.0) / m
        s0 -= h * t  # (-1)^{m+1} H_m u_m
    y0 = (2.0 / np.pi) * ((lg + np.longdouble(EULER_GAMMA)) * j0 + s0)
    # Y1 = (2/pi) log(z/2) J1 - 2/(pi z)
    #      - (1/pi) sum_{m>=0} (-1)^m (H_m + H_{m+1} - 2 gamma) (z/2)^{2m+1} / (m! (m+1)!)
    t = zl / 2.0
    h0 = np.longdouble(0.0)
    h1 = np.longdouble(1.0)
    s1 = (h0 + h1 - 2.0 * np.longdouble(EULER_GAMMA)) * t
    for m in range(1, _SERIES_TERMS):
        t = t * q / (m * (m + 1))
        h0 = h0 + np.longdouble(1.0) / m
        h1 = h1 + np.longdouble(1.0) / (m + 1)
        s1 += (h0 + h1 - 2.0 * np.longdouble(EULER_GAMMA)) * t
    y1 = (2.0 / np.pi) * lg * j1 - 2.0 / (np.pi * zl) - s1 / np.pi
    return y0, y1


def _asymptotic_h(order: int, z):
    """H^(1)_order(z) ~ sqrt(2/(pi z)) e^{i omega} sum_k i^k a_k / z^k."""
    omega = z - 0.5 * order * np.pi - 0.25 * np.pi
    term = np.ones_like(z, dtype=complex)
    total = term.copy()
    active = np.ones_like(z, dtype=bool)
    prev = np.abs(term)
    mu = 4.0 * order * order
    for k in range(40):
        term = term * 1j * (mu - (2 * k + 1) ** 2) / (8.0 * (k + 1) * z)
        mag = np.abs(term)
        active = active & (mag < prev) & (mag > 1e-18)
        if not np.any(active):
            break
        total = np.where(active, total + term, total)
        prev = mag
    return np.sqrt(2.0 / (np.pi * z)) * np.exp(1j * omega) * total


def _bessel_pair(order: int, z):
    """(J_order, Y_order) for real positive z, vectorized."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0.0)):
        raise ValueError("Bessel argument must be real and positive")
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    j = np.empty_like(z)
    y = np.empty_like(z)
    small = z < _SPLIT
    if np.any(small):
        j0, j1 = _series_j0_j1(z[small])
        y0, y1 = _series_y0_y1(z[small], j0, j1)
        j[small] = (j0 if order == 0 else j1).astype(float)
        y[small] = (y0 if order == 0 else y1).astype(float)
    if np.any(~small):
        h = _asymptotic_h(order, z[~small])
        j[~small] = h.real
        y[~small] = h.imag
    if scalar:
        return float(j[0]), float(y[0])
    return j, y


def bessel_j0(z):
    return _bessel_pair(0, z)[0]


def bessel_j1(z):
    return _bessel_pair(1, z)[0]


def bessel_y0(z):
    return _bessel_pair(0, z)[1]


def bessel_y1(z):
    return _bessel_pair(1, z)[1]


def hankel1(order: int, z):
    """Hankel function of the first kind, H^(1)_order(z) = J + iY, z > 0."""
    if order not in (0, 1):
        raise ValueError(f"only orders 0 and 1 are implemented, got {order}")
    j, y = _bessel_pair(order, z)
    return j + 1j * y


# ---------------------------------------------------------------------------
# Orthonormal spherical harmonics (Condon-Shortley phase)
# ---------------------------------------------------------------------------
def sph_index(n: int, m: int) -> int:
    """Position of (n, m) in the packed coefficient layout n^2 + n + m."""
    return n * n + n + m


def sph_harm_table(lmax: int, theta, phi) -> np.ndarray:
    """All Y_nm(theta, phi) for n < lmax, packed as (npoints, lmax^2).

    Columns follow sph_index. Normalization is orthonormal on the unit
    sphere: integral of Y_nm conj(Y_n'm') dOmega = delta. The normalized
    associated-Legendre recurrence is stable to degree 64 and beyond
    (no factorials are formed).
    """
    if lmax < 1 or lmax > 65:
        raise ValueError(f"degree bound lmax must be in [1, 65], got {lmax}")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    ct, st = np.cos(theta), np.sin(theta)
    npts = theta.size
    # rows are contiguous in the work buffer; callers get the transpose view
    buf = np.empty((lmax * lmax, npts), dtype=complex)

    eim = np.exp(1j * phi)
    pmm = np.full(npts, 1.0 / np.sqrt(4.0 * np.pi))  # P tilde_m^m
    phase = np.ones(npts, dtype=complex)  # e^{i m phi}
    for m in range(lmax):
        if m > 0:
            pmm = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * pmm
            phase = phase * eim
        sign = -1.0 if m % 2 else 1.0
        p_prev = np.zeros(npts)
        p_cur = pmm
        for n in range(m, lmax):
            if n > m:
                a = np.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
                b = np.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1.0) ** 2 - 1.0))
                p_prev, p_cur = p_cur, a * (ct * p_cur - b * p_prev)
            row = buf[sph_index(n, m)]
            np.multiply(p_cur, phase, out=row)
            if m > 0:
                np.conj(row, out=buf[sph_index(n, -m)])
                if sign < 0:
                    np.negative(buf[sph_index(n, -m)], out=buf[sph_index(n, -m)])
    return buf.T


def sph_harm(n: int, m: int, theta, phi):
    """Single orthonormal spherical harmonic Y_nm(theta, phi)."""
    if abs(m) > n:
        raise ValueError(f"order |m| <= degree n required, got n={n}, m={m}")
    if n < 0 or n > 64:
        raise ValueError(f"degree n must be in [0, 64], got {n}")
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0 and np.asarray(phi).ndim == 0
    table = sph_harm_table(n + 1, np.ravel(theta), np.ravel(np.asarray(phi, float)))
    vals = table[:, sph_index(n, m)]
    return complex(vals[0]) if scalar else vals.reshape(theta.shape)
