"""Experiment drivers and the `lpsub` command line.

Reproduces the close-evaluation studies as CSV emitters: log10-error
fields over a grid, error scans along boundary normals, wavenumber
sweeps, and identity residual tables. Three boundary-value problems are
wired up:

  * laplace-int-dirichlet: interior Dirichlet, double-layer ansatz,
    u_exact(x) = (x1 - x01)/|x - x0|^2 with an exterior source x0;
  * laplace-ext-neumann: exterior Neumann, single-layer ansatz;
    2D: the same dipole with x0 interior; 3D: u_exact = 1/|x - x0|;
  * helmholtz-scatter: sound-soft scattering, combined-field ansatz,
    u_exact = G_H(x, x0) with x0 interior.

CSV column contracts (extra columns follow the required ones):
  scan   -> ell, err_<method>...
  field  -> x1, x2[, x3], side, ell, err_<method>...
  ksweep -> k, maxerr_<method>...
  identity -> case, region, N, residual
Error columns are recomputed from the printed value/exact strings, so
re-deriving |value - exact| from a parsed CSV reproduces them exactly.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import bie
from .geometry import (
    Boundary,
    Curve2D,
    Surface3D,
    boundary_sample,
    nearest_boundary_point,
    offset_point,
    parse_shape,
)
from .identities import builtin_cases, identity_residual
from .kernels import single_kernel
from .potentials import Representation, eval_potential

logger = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "run_normal_scan",
    "run_error_field",
    "run_k_sweep",
    "run_identity_table",
    "solve_config_density",
    "main",
]

_PROBLEMS = ("laplace-int-dirichlet", "laplace-ext-neumann", "helmholtz-scatter")
_METHOD_ALIASES = {
    "standard": "ptr",
    "method": "ptr",
    "ptr": "ptr",
    "gauss-sub": "gauss_sub",
    "gauss_sub": "gauss_sub",
    "dsl": "dsl",
    "dsg": "dsg",
    "pws": "pws",
}
_PROBLEM_METHODS = {
    "laplace-int-dirichlet": ("ptr", "gauss_sub"),
    "laplace-ext-neumann": ("ptr", "dsl", "dsg"),
    "helmholtz-scatter": ("ptr", "pws"),
}
_PROBLEM_FAMILY = {
    "laplace-int-dirichlet": "laplace-dlp",
    "laplace-ext-neumann": "laplace-slp",
    "helmholtz-scatter": "helmholtz-combined",
}
_MODE_OF = {"ptr": "standard", "gauss_sub": "gauss-sub", "dsl": "dsl", "dsg": "dsg", "pws": "pws"}
_BACKENDS = ("ptr", "kress", "bie-pws", "galerkin")


@dataclass
class ExperimentConfig:
    """One experiment: problem, shape, resolution, exact source, methods."""

    problem: str
    shape: str
    N: int
    x0: Sequence[float]
    k: Optional[float] = None
    methods: List[str] = field(default_factory=list)
    bie_backend: Optional[str] = None
    out: str = "out.csv"
    seed: int = 20240601
    scan: Dict = field(default_factory=dict)
    grid: Dict = field(default_factory=dict)
    ksweep: Dict = field(default_factory=dict)
    identity: Dict = field(default_factory=dict)
    density_cache: Optional[str] = None

    @classmethod
    def from_dict(cls, doc: Dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)

    def __post_init__(self):
        if self.problem not in _PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.problem == "helmholtz-scatter":
            if self.k is None or not self.k > 0:
                raise ValueError("helmholtz-scatter needs a positive wavenumber")
        self.methods = [self._canon(m) for m in self.methods] or list(
            _PROBLEM_METHODS[self.problem]
        )
        allowed = _PROBLEM_METHODS[self.problem]
        for m in self.methods:
            if m not in allowed:
                raise ValueError(f"method {m!r} incompatible with {self.problem}")
        if self.bie_backend is not None and self.bie_backend not in _BACKENDS:
            raise ValueError(f"unknown BIE backend {self.bie_backend!r}")

    @staticmethod
    def _canon(m: str) -> str:
        try:
            return _METHOD_ALIASES[m.lower()]
        except KeyError:
            raise ValueError(f"unknown method {m!r}") from None

    def boundary(self) -> Boundary:
        return parse_shape(self.shape)

    def backend(self, boundary: Boundary) -> str:
        if self.bie_backend is not None:
            return self.bie_backend
        if isinstance(boundary, Surface3D):
            return "galerkin"
        return "kress" if self.problem == "helmholtz-scatter" else "ptr"


# ---------------------------------------------------------------------------
# Exact solutions and boundary data
# ---------------------------------------------------------------------------
def _validate_source(cfg: ExperimentConfig, boundary: Boundary) -> np.ndarray:
    x0 = np.asarray(cfg.x0, dtype=float)
    if x0.size != boundary.dim:
        raise ValueError(f"x0 has dimension {x0.size}, boundary is {boundary.dim}D")
    _, _, side = nearest_boundary_point(boundary, x0)
    need = "exterior" if cfg.problem == "laplace-int-dirichlet" else "interior"
    if side != need:
        raise ValueError(
            f"{cfg.problem} needs the exact-solution source on the {need} side"
        )
    return x0


def exact_solution(cfg: ExperimentConfig, boundary: Boundary):
    """(u_exact(points), boundary data(points, normals)) for the problem."""
    x0 = _validate_source(cfg, boundary)
    if cfg.problem == "helmholtz-scatter":
        k = cfg.k

        def u(x):
            return single_kernel("helmholtz", boundary.dim, np.asarray(x), x0, k)

        return u, lambda p, n: u(p)
    if cfg.problem == "laplace-ext-neumann" and boundary.dim == 3:

        def u(x):
            return 1.0 / np.linalg.norm(np.asarray(x) - x0, axis=-1) + 0.0j

        def g(p, n):
            d = np.asarray(p) - x0
            return -np.sum(np.asarray(n) * d, axis=-1) / np.linalg.norm(d, axis=-1) ** 3

        return u, g

    def u(x):
        d = np.asarray(x) - x0
        return d[..., 0] / np.sum(d * d, axis=-1) + 0.0j

    if cfg.problem == "laplace-int-dirichlet":
        return u, lambda p, n: u(p)

    def g(p, n):
        d = np.asarray(p) - x0
        r2 = np.sum(d * d, axis=-1)
        grad = -2.0 * d[..., 0:1] * d / r2[..., None] ** 2
        grad[..., 0] += 1.0 / r2
        return np.sum(np.asarray(n) * grad, axis=-1)

    return u, g


def solve_config_density(cfg: ExperimentConfig, boundary: Boundary):
    """Solve (or load) the density for a config; caches when asked."""
    if cfg.density_cache and os.path.exists(cfg.density_cache):
        logger.info("loading cached density from %s", cfg.density_cache)
        return bie.load_density(cfg.density_cache)
    _, data = exact_solution(cfg, boundary)
    backend = cfg.backend(boundary)
    if isinstance(boundary, Surface3D):
        problem = {
            "laplace-int-dirichlet": "laplace-dirichlet",
            "laplace-ext-neumann": "laplace-neumann",
            "helmholtz-scatter": "helmholtz",
        }[cfg.problem]
        if backend == "bie-pws":
            problem = "helmholtz-pws"
        elif backend != "galerkin":
            raise ValueError(f"backend {backend!r} unavailable in 3D")
        density = bie.solve_galerkin_3d(boundary, problem, data, k=cfg.k, N=cfg.N)
    elif cfg.problem == "laplace-int-dirichlet":
        if backend != "ptr":
            raise ValueError(f"backend {backend!r} unavailable for {cfg.problem}")
        density = bie.solve_laplace_dirichlet_2d(boundary, data, cfg.N)
    elif cfg.problem == "laplace-ext-neumann":
        if backend != "ptr":
            raise ValueError(f"backend {backend!r} unavailable for {cfg.problem}")
        density = bie.solve_laplace_neumann_2d(boundary, data, cfg.N)
    elif backend == "kress":
        density = bie.solve_helmholtz_kress_2d(boundary, cfg.k, data, cfg.N)
    elif backend == "bie-pws":
        density = bie.solve_helmholtz_pws_2d(boundary, cfg.k, data, cfg.N)
    else:
        raise ValueError(f"backend {backend!r} unavailable for {cfg.problem} in 2D")
    if cfg.density_cache:
        bie.save_density(density, cfg.density_cache)
    return density


# ---------------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------------
def _fmt(v: float) -> str:
    return repr(float(v))


def _write_csv(path: str, header: List[str], rows: List[List[str]], meta: Dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def _value_error_cells(values: Dict[str, complex], exact: complex):
    """Value/exact cells plus error cells recomputed from the printed
    strings, so CSV consumers can reproduce them bit-exactly."""
    ex_re, ex_im = _fmt(exact.real), _fmt(exact.imag)
    exact_rounded = complex(float(ex_re), float(ex_im))
    err_cells, val_cells = [], []
    for m, v in values.items():
        v_re, v_im = _fmt(v.real), _fmt(v.imag)
        rounded = complex(float(v_re), float(v_im))
        err_cells.append(_fmt(abs(rounded - exact_rounded)))
        val_cells.extend([v_re, v_im])
    return err_cells, val_cells + [ex_re, ex_im]


def _meta(cfg: ExperimentConfig, kind: str, t_start: float, **extra) -> Dict:
    doc = {
        "kind": kind,
        "problem": cfg.problem,
        "shape": cfg.shape,
        "N": cfg.N,
        "k": cfg.k,
        "x0": list(np.asarray(cfg.x0, dtype=float)),
        "methods": cfg.methods,
        "seed": cfg.seed,
        "elapsed_s": round(time.time() - t_start, 6),
    }
    doc.update(extra)
    return doc


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------
def _representation(cfg: ExperimentConfig, method: str) -> Representation:
    fam = _PROBLEM_FAMILY[cfg.problem]
    return Representation(family=fam, mode=_MODE_OF[method], k=cfg.k)


def _eval_methods(cfg, boundary, density, x, xstar) -> Dict[str, complex]:
    return {
        m: eval_potential(_representation(cfg, m), boundary, density, x, xstar)
        for m in cfg.methods
    }


def _scan_params(cfg: ExperimentConfig, boundary: Boundary):
    scan = dict(cfg.scan)
    ells = scan.get("ells")
    if ells is None:
        lo = float(scan.get("ell_min", 1e-6))
        hi = float(scan.get("ell_max", 1.0))
        n = int(scan.get("n_ell", 40))
        ells = np.geomspace(lo, hi, n)
    else:
        ells = np.asarray(ells, dtype=float)
    if np.any(ells <= 0):
        raise ValueError("scan distances must be positive")
    if isinstance(boundary, Curve2D):
        if "tstar" not in scan:
            raise ValueError("2D scans need scan.tstar")
        param = float(scan["tstar"])
        if scan.get("snap_tstar"):
            param = 2.0 * np.pi * round(param * cfg.N / (2.0 * np.pi)) / cfg.N
    else:
        if "point" in scan:
            param = _project_param(boundary, np.asarray(scan["point"], dtype=float))
        elif "sstar" in scan:
            param = (float(scan["sstar"]), float(scan.get("tstar", 0.0)))
        else:
            raise ValueError("3D scans need scan.point or scan.sstar/tstar")
    return np.sort(ells), param


def run_normal_scan(cfg: ExperimentConfig) -> str:
    """Errors along the normal of one boundary point; rows ordered by ell."""
    t0 = time.time()
    boundary = cfg.boundary()
    u_exact, _ = exact_solution(cfg, boundary)
    density = solve_config_density(cfg, boundary)
    ells, param = _scan_params(cfg, boundary)
    xstar = boundary_sample(boundary, param)
    side = "interior" if cfg.problem == "laplace-int-dirichlet" else "exterior"

    header = (
        ["ell"]
        + [f"err_{m}" for m in cfg.methods]
        + sum([[f"value_{m}_re", f"value_{m}_im"] for m in cfg.methods], [])
        + ["exact_re", "exact_im"]
    )
    rows = []
    for ell in ells:
        x = offset_point(xstar, float(ell), side)
        vals = _eval_methods(cfg, boundary, density, x, xstar)
        err_cells, val_cells = _value_error_cells(vals, complex(u_exact(x)))
        rows.append([_fmt(ell)] + err_cells + val_cells)
    meta = _meta(cfg, "scan", t0, param=param if np.isscalar(param) else list(param), side=side)
    _write_csv(cfg.out, header, rows, meta)
    return cfg.out


def run_error_field(cfg: ExperimentConfig) -> str:
    """Errors on a grid over the shape's (inflated) bounding box.

    Grid points on the problem's irrelevant side are masked out; points
    within 1e-6 of the boundary (relative to its diameter) are skipped
    and counted in the metadata.
    """
    t0 = time.time()
    boundary = cfg.boundary()
    u_exact, _ = exact_solution(cfg, boundary)
    density = solve_config_density(cfg, boundary)
    side = "interior" if cfg.problem == "laplace-int-dirichlet" else "exterior"

    grid = dict(cfg.grid)
    n = int(grid.get("n", 200))
    if isinstance(boundary, Curve2D):
        t = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        pts = boundary.point(t)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
    else:
        lo = np.asarray(boundary.center) - boundary.radius
        hi = np.asarray(boundary.center) + boundary.radius
        lo, hi = lo[:2], hi[:2]
    pad = 0.25 * (hi - lo)  # inflate the bounding box by 50% total
    box = grid.get("box")
    if box is not None:
        x1 = np.linspace(box[0], box[1], n)
        x2 = np.linspace(box[2], box[3], n)
    else:
        x1 = np.linspace(lo[0] - pad[0], hi[0] + pad[0], n)
        x2 = np.linspace(lo[1] - pad[1], hi[1] + pad[1], n)
    x3 = float(grid.get("slice", boundary.center[2])) if boundary.dim == 3 else None

    coord_cols = ["x1", "x2"] + (["x3"] if boundary.dim == 3 else [])
    header = (
        coord_cols
        + ["side", "ell"]
        + [f"err_{m}" for m in cfg.methods]
        + sum([[f"value_{m}_re", f"value_{m}_im"] for m in cfg.methods], [])
        + ["exact_re", "exact_im"]
    )
    rows, skipped = [], 0
    tol_on = 1e-6 * boundary.diameter()
    for b in x2:
        for a in x1:
            x = np.array([a, b]) if boundary.dim == 2 else np.array([a, b, x3])
            try:
                param, dist, pt_side = nearest_boundary_point(boundary, x)
            except ValueError:
                skipped += 1
                continue
            if dist < tol_on:
                skipped += 1
                continue
            if pt_side != side:
                continue
            xstar = boundary_sample(boundary, param)
            vals = _eval_methods(cfg, boundary, density, x, xstar)
            err_cells, val_cells = _value_error_cells(vals, complex(u_exact(x)))
            coords = [_fmt(c) for c in x]
            rows.append(coords + [pt_side, _fmt(dist)] + err_cells + val_cells)
    if not rows:
        raise ValueError("field grid produced no evaluable points")
    meta = _meta(cfg, "field", t0, skipped_near_boundary=skipped, grid_n=n)
    _write_csv(cfg.out, header, rows, meta)
    return cfg.out


def run_k_sweep(cfg: ExperimentConfig) -> str:
    """Max near-boundary error per wavenumber, one row per k."""
    t0 = time.time()
    boundary = cfg.boundary()
    sweep = dict(cfg.ksweep)
    ks = [float(v) for v in sweep.get("ks", [])]
    if not ks:
        raise ValueError("ksweep.ks must list at least one wavenumber")
    ells = np.asarray(sweep.get("ells", np.geomspace(1e-4, 1e-1, 4)), dtype=float)
    if isinstance(boundary, Curve2D):
        tstars = sweep.get("tstars")
        if tstars is None:
            tstars = [2.0 * np.pi * j / 8.0 for j in range(8)]
        if sweep.get("snap_tstar", True):
            tstars = [2 * np.pi * round(t * cfg.N / (2 * np.pi)) / cfg.N for t in tstars]
        params = [float(t) for t in tstars]
    else:
        pts = sweep.get("points")
        if pts is None:
            raise ValueError("3D ksweep needs ksweep.points (boundary points)")
        params = [_project_param(boundary, np.asarray(p, float)) for p in pts]

    header = ["k"] + [f"maxerr_{m}" for m in cfg.methods]
    rows = []
    for k in ks:
        kcfg = ExperimentConfig(
            problem=cfg.problem,
            shape=cfg.shape,
            N=cfg.N,
            x0=cfg.x0,
            k=k,
            methods=list(cfg.methods),
            bie_backend=cfg.bie_backend,
            seed=cfg.seed,
        )
        u_exact, _ = exact_solution(kcfg, boundary)
        density = solve_config_density(kcfg, boundary)
        worst = {m: 0.0 for m in cfg.methods}
        for prm in params:
            xstar = boundary_sample(boundary, prm)
            for ell in ells:
                x = offset_point(xstar, float(ell), "exterior")
                vals = _eval_methods(kcfg, boundary, density, x, xstar)
                ex = complex(u_exact(x))
                for m, v in vals.items():
                    worst[m] = max(worst[m], abs(v - ex))
        rows.append([_fmt(k)] + [_fmt(worst[m]) for m in cfg.methods])
    meta = _meta(cfg, "ksweep", t0, ks=ks, ells=list(map(float, ells)))
    _write_csv(cfg.out, header, rows, meta)
    return cfg.out


def run_identity_table(cfg: ExperimentConfig) -> str:
    """Identity residuals over the built-in case matrix, per region and N."""
    t0 = time.time()
    boundary = cfg.boundary()
    ident = dict(cfg.identity)
    Ns = [int(n) for n in ident.get("Ns", [])]
    if not Ns:
        raise ValueError("identity.Ns must list at least one resolution")
    family = ident.get("family", "laplace")
    k = float(ident.get("k", 5.0 if boundary.dim == 2 else 1.0))
    rng = np.random.default_rng(cfg.seed)
    pts = {
        "interior": [_random_point(boundary, rng, "interior") for _ in range(3)],
        "exterior": [_random_point(boundary, rng, "exterior") for _ in range(3)],
    }
    if boundary.dim == 2:
        prm = [float(v) for v in rng.uniform(0, 2 * np.pi, 3)]
    else:
        prm = [(float(np.arccos(rng.uniform(-1, 1))), float(rng.uniform(-np.pi, np.pi))) for _ in range(3)]

    header = ["case", "region", "N", "residual"]
    rows = []
    for N in Ns:
        for region in ("interior", "boundary", "exterior"):
            anchors = prm if region == "boundary" else pts[region]
            first = builtin_cases(
                boundary,
                family,
                region,
                point=None if region == "boundary" else anchors[0],
                param=anchors[0] if region == "boundary" else None,
                k=k,
            )
            for idx in range(len(first)):
                worst = 0.0
                for anchor in anchors:
                    cases = builtin_cases(
                        boundary,
                        family,
                        region,
                        point=None if region == "boundary" else anchor,
                        param=anchor if region == "boundary" else None,
                        k=k,
                    )
                    worst = max(worst, identity_residual(cases[idx], boundary, N))
                rows.append([first[idx].label(), region, str(N), _fmt(worst)])
    meta = _meta(cfg, "identity", t0, Ns=Ns, family=family, identity_k=k)
    _write_csv(cfg.out, header, rows, meta)
    return cfg.out


def _project_param(boundary: Boundary, p: np.ndarray):
    """Boundary parameter of a point given on (or near) the boundary."""
    center = np.asarray(boundary.interior_point())
    param, _, _ = nearest_boundary_point(boundary, center + (p - center) * (1 + 1e-9))
    return param


def _random_point(boundary: Boundary, rng, side: str) -> np.ndarray:
    """Seeded off-boundary point at a side-appropriate distance."""
    scale = 0.5 * boundary.diameter()
    for _ in range(1000):
        if boundary.dim == 2:
            t = rng.uniform(0, 2 * np.pi)
            xs = boundary_sample(boundary, t)
        else:
            xs = boundary_sample(
                boundary,
                (np.arccos(rng.uniform(-1, 1)), rng.uniform(-np.pi, np.pi)),
            )
        ell = rng.uniform(0.3, 0.8) * scale
        x = offset_point(xs, ell, side)
        try:
            _, dist, got = nearest_boundary_point(boundary, x)
        except ValueError:
            continue
        if got == side and dist >= 0.3 * scale:
            return x
    raise RuntimeError(f"could not sample a {side} point")


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------
def _load_config(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    for key in ("shape", "N", "k", "x0", "out", "problem"):
        val = getattr(args, key, None)
        if val is not None:
            doc[key] = val
    if getattr(args, "methods", None):
        doc["methods"] = args.methods.split(",")
    if getattr(args, "tstar", None) is not None:
        doc.setdefault("scan", {})["tstar"] = args.tstar
    if getattr(args, "Ns", None):
        doc.setdefault("identity", {})["Ns"] = [int(v) for v in args.Ns.split(",")]
    if getattr(args, "ks", None):
        doc.setdefault("ksweep", {})["ks"] = [float(v) for v in args.ks.split(",")]
    doc.setdefault("problem", "laplace-ext-neumann")
    doc.setdefault("x0", [0.1, 0.4])
    doc.setdefault("N", 128)
    return ExperimentConfig.from_dict(doc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lpsub",
        description="layer-potential close-evaluation experiments (CSV emitters)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("identity", "identity residual table"),
        ("solve", "solve a BIE and cache the density"),
        ("field", "error field over a grid"),
        ("scan", "error scan along a boundary normal"),
        ("ksweep", "max error against the wavenumber"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--shape", help="circle:r | kite | star | sphere:r | fourier:[...]")
        p.add_argument("--problem", choices=_PROBLEMS)
        p.add_argument("--N", type=int)
        p.add_argument("--k", type=float)
        p.add_argument("--x0", type=float, nargs="+")
        p.add_argument("--methods", help="comma-separated method list")
        p.add_argument("--out", help="output CSV path")
        if name == "scan":
            p.add_argument("--tstar", type=float)
        if name == "identity":
            p.add_argument("--Ns", help="comma-separated resolutions")
        if name == "ksweep":
            p.add_argument("--ks", help="comma-separated wavenumbers")
    args = parser.parse_args(argv)
    cfg = _load_config(args)

    if args.command == "solve":
        boundary = cfg.boundary()
        density = solve_config_density(cfg, boundary)
        path = cfg.density_cache or (os.path.splitext(cfg.out)[0] + ".density.json")
        bie.save_density(density, path)
        print(f"density written to {path} (solve residual {density.residual:.3e})")
        return 0
    runner = {
        "identity": run_identity_table,
        "field": run_error_field,
        "scan": run_normal_scan,
        "ksweep": run_k_sweep,
    }[args.command]
    out = runner(cfg)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
