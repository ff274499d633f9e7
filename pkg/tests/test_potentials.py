import numpy as np
import pytest

from lpsub import bie
from lpsub import geometry as geo
from lpsub import potentials as pot
from tests.conftest import (
    POINT_A,
    SPHERE_X0,
    dipole,
    helm_source,
    monopole3d,
)


# ---------------------------------------------------------------------------
# Subtraction solutions
# ---------------------------------------------------------------------------
def test_constant_solution_constraints(kite):
    xs = geo.boundary_sample(kite, 0.9)
    sol = pot.make_subtraction_solution("constant", xs)
    assert sol.satisfies_dlp and not sol.satisfies_slp
    assert sol.u(xs.point[None, :])[0] == 1.0
    assert sol.dn(xs.point[None, :], xs.normal[None, :])[0] == 0.0


def test_linear_solution_constraints(unit_circle):
    xs = geo.boundary_sample(unit_circle, 0.0)
    sol = pot.make_subtraction_solution("linear", xs)
    assert sol.satisfies_slp
    # u(y) = y1 on this anchor; normal derivative at x* is n.n = 1
    assert sol.u(np.array([[0.3, 0.7]]))[0] == pytest.approx(0.3)
    assert sol.dn(xs.point[None, :], xs.normal[None, :])[0] == pytest.approx(1.0)


def test_green_solution_constraints(star):
    xs = geo.boundary_sample(star, 1.3)
    sol = pot.make_subtraction_solution("green-laplace", xs)
    assert sol.satisfies_slp
    val = sol.dn(xs.point[None, :], xs.normal[None, :])[0]
    assert val == pytest.approx(1.0, abs=1e-12)


def test_plane_wave_solution_constraints(star):
    xs = geo.boundary_sample(star, 2.1)
    k = 15.0
    sol = pot.make_subtraction_solution("plane-wave", xs, k)
    assert sol.satisfies_helm
    assert sol.u(xs.point[None, :])[0] == pytest.approx(1.0)
    assert sol.dn(xs.point[None, :], xs.normal[None, :])[0] == pytest.approx(1j * k)


def test_green_helmholtz_has_no_anchor_flag(unit_circle):
    xs = geo.boundary_sample(unit_circle, 0.4)
    sol = pot.make_subtraction_solution("green-helmholtz", xs, 5.0)
    assert not sol.satisfies_helm  # documented: Green-based waves cannot anchor
    assert sol.u(xs.point[None, :])[0] == pytest.approx(1.0)  # normalized


def test_solution_validation_errors(unit_circle):
    xs = geo.boundary_sample(unit_circle, 0.0)
    with pytest.raises(ValueError, match="unknown"):
        pot.make_subtraction_solution("cubic", xs)
    with pytest.raises(ValueError, match="wavenumber"):
        pot.make_subtraction_solution("plane-wave", xs)
    with pytest.raises(ValueError, match="wavenumber"):
        pot.make_subtraction_solution("linear", xs, 2.0)


def test_representation_validation():
    with pytest.raises(ValueError, match="requires family"):
        pot.Representation(family="laplace-dlp", mode="dsl")
    with pytest.raises(ValueError, match="wavenumber"):
        pot.Representation(family="helmholtz-combined", mode="pws")
    with pytest.raises(ValueError, match="subtraction solution"):
        pot.Representation(family="laplace-slp", mode="general")


# ---------------------------------------------------------------------------
# Gauss subtraction: exactness for constant densities
# ---------------------------------------------------------------------------
def test_gauss_sub_constant_density_is_exact(unit_circle):
    grid = geo.curve_grid(unit_circle, 32)
    c = 0.7 - 0.2j
    density = bie.Density2D(grid=grid, values=np.full(32, c))
    xs = geo.boundary_sample(unit_circle, 0.3)
    x = geo.offset_point(xs, 1e-6, "interior")
    rep = pot.Representation(family="laplace-dlp", mode="gauss-sub")
    val = pot.eval_potential(rep, unit_circle, density, x, xs)
    assert val == pytest.approx(-c, abs=1e-15)


def test_on_boundary_point_rejected(unit_circle):
    grid = geo.curve_grid(unit_circle, 32)
    density = bie.Density2D(grid=grid, values=np.ones(32, complex))
    rep = pot.Representation(family="laplace-dlp", mode="standard")
    with pytest.raises(ValueError, match="boundary"):
        pot.eval_potential(rep, unit_circle, density, np.array([1.0, 0.0]))


# ---------------------------------------------------------------------------
# Example 1 behavior (kite, N = 128)
# ---------------------------------------------------------------------------
NODE_T = 2 * np.pi * 20 / 128  # scan anchor on the quadrature grid


def test_example1_far_field(kite, kite_neumann_density):
    xs = geo.boundary_sample(kite, NODE_T)
    x = geo.offset_point(xs, 1.0, "exterior")
    for mode in ("standard", "dsl", "dsg"):
        rep = pot.Representation(family="laplace-slp", mode=mode)
        val = pot.eval_potential(rep, kite, kite_neumann_density, x, xs)
        assert abs(val - dipole(x)) <= 1e-10


def test_example1_close_field_improvement(kite, kite_neumann_density):
    """In the close band the subtracted forms beat plain PTR by >= 100x."""
    xs = geo.boundary_sample(kite, NODE_T)
    worst = {m: 0.0 for m in ("standard", "dsl", "dsg")}
    for ell in np.geomspace(1e-5, 1e-2, 7):
        x = geo.offset_point(xs, float(ell), "exterior")
        for mode in worst:
            rep = pot.Representation(family="laplace-slp", mode=mode)
            val = pot.eval_potential(rep, kite, kite_neumann_density, x, xs)
            worst[mode] = max(worst[mode], abs(val - dipole(x)))
    assert worst["dsl"] <= 1e-2 * worst["standard"]
    assert worst["dsg"] <= 1e-2 * worst["standard"]


def test_example3_close_field_improvement(star, star_kress_density):
    xs = geo.boundary_sample(star, 2 * np.pi * 40 / 256)
    worst = {m: 0.0 for m in ("standard", "pws")}
    for ell in np.geomspace(1e-5, 1e-2, 7):
        x = geo.offset_point(xs, float(ell), "exterior")
        for mode in worst:
            rep = pot.Representation(family="helmholtz-combined", mode=mode, k=15.0)
            val = pot.eval_potential(rep, star, star_kress_density, x, xs)
            worst[mode] = max(worst[mode], abs(val - complex(helm_source(x, 15.0))))
    assert worst["pws"] <= 1e-2 * worst["standard"]


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------
def test_mode_equivalence_far_from_boundary(kite, kite_neumann_density):
    """The modifications are identities: far away all modes agree."""
    xs = geo.boundary_sample(kite, 0.35)
    x = geo.offset_point(xs, 1.5, "exterior")
    rep0 = pot.Representation(family="laplace-slp", mode="standard")
    ref = pot.eval_potential(rep0, kite, kite_neumann_density, x, xs)
    for mode in ("dsl", "dsg"):
        rep = pot.Representation(family="laplace-slp", mode=mode)
        val = pot.eval_potential(rep, kite, kite_neumann_density, x, xs)
        assert abs(val - ref) <= 1e-10


def test_mode_equivalence_helmholtz(star, star_kress_density):
    xs = geo.boundary_sample(star, 1.0)
    x = geo.offset_point(xs, 1.5, "exterior")
    rep0 = pot.Representation(family="helmholtz-combined", mode="standard", k=15.0)
    ref = pot.eval_potential(rep0, star, star_kress_density, x, xs)
    rep = pot.Representation(family="helmholtz-combined", mode="pws", k=15.0)
    val = pot.eval_potential(rep, star, star_kress_density, x, xs)
    assert abs(val - ref) <= 1e-10


def test_gauss_sub_equivalence_interior(kite):
    x0 = np.array([2.0, 1.5])
    mu = bie.solve_laplace_dirichlet_2d(kite, lambda p, n: dipole(p, x0), 128)
    xs = geo.boundary_sample(kite, 0.8)
    x = geo.offset_point(xs, 0.45, "interior")
    rep0 = pot.Representation(family="laplace-dlp", mode="standard")
    rep1 = pot.Representation(family="laplace-dlp", mode="gauss-sub")
    v0 = pot.eval_potential(rep0, kite, mu, x, xs)
    v1 = pot.eval_potential(rep1, kite, mu, x, xs)
    assert abs(v0 - v1) <= 1e-10
    assert abs(v1 - dipole(x, x0)) <= 1e-10


def test_subtracted_brackets_vanish_at_nodes(star, star_kress_density):
    """At y = x* every subtracted factor is zero by construction."""
    k = 15.0
    xs = geo.boundary_sample(star, star_kress_density.grid.t[10])
    # density bracket
    mu_star = bie.density_interp(star_kress_density, xs.param)
    assert abs(star_kress_density.values[10] - mu_star) <= 1e-13
    # plane-wave brackets
    sol = pot.make_subtraction_solution("plane-wave", xs, k)
    u_val = sol.u(xs.point[None, :])[0]
    dn_val = sol.dn(xs.point[None, :], xs.normal[None, :])[0]
    assert abs(1.0 - u_val) <= 1e-13
    assert abs(dn_val - 1j * k) <= 1e-13
    # linear and Green brackets
    for label in ("linear", "green-laplace"):
        s = pot.make_subtraction_solution(label, xs)
        assert abs(s.dn(xs.point[None, :], xs.normal[None, :])[0] - 1.0) <= 1e-13
        assert abs(s.u(xs.point[None, :])[0] - s.u(xs.point[None, :])[0]) == 0.0


def test_dsl_equals_general_linear(kite, kite_neumann_density):
    xs = geo.boundary_sample(kite, 1.7)
    sol = pot.make_subtraction_solution("linear", xs)
    rep_dsl = pot.Representation(family="laplace-slp", mode="dsl")
    rep_gen = pot.Representation(family="laplace-slp", mode="general", u_sol=sol)
    for ell in (1e-4, 0.2):
        x = geo.offset_point(xs, ell, "exterior")
        v1 = pot.eval_potential(rep_dsl, kite, kite_neumann_density, x, xs)
        v2 = pot.eval_potential(rep_gen, kite, kite_neumann_density, x, xs)
        assert abs(v1 - v2) <= 1e-13


def test_gauss_sub_equals_general_constant(kite):
    x0 = np.array([2.0, 1.5])
    mu = bie.solve_laplace_dirichlet_2d(kite, lambda p, n: dipole(p, x0), 64)
    xs = geo.boundary_sample(kite, 0.8)
    sol = pot.make_subtraction_solution("constant", xs)
    rep_gs = pot.Representation(family="laplace-dlp", mode="gauss-sub")
    rep_gen = pot.Representation(family="laplace-dlp", mode="general", u_sol=sol)
    x = geo.offset_point(xs, 1e-3, "interior")
    v1 = pot.eval_potential(rep_gs, kite, mu, x, xs)
    v2 = pot.eval_potential(rep_gen, kite, mu, x, xs)
    assert abs(v1 - v2) <= 1e-13


def test_general_mode_rejects_wrong_anchor(kite, kite_neumann_density):
    xs = geo.boundary_sample(kite, 1.7)
    other = geo.boundary_sample(kite, 0.2)
    sol = pot.make_subtraction_solution("linear", other)
    rep = pot.Representation(family="laplace-slp", mode="general", u_sol=sol)
    x = geo.offset_point(xs, 0.1, "exterior")
    with pytest.raises(ValueError, match="different x\\*"):
        pot.eval_potential(rep, kite, kite_neumann_density, x, xs)


def test_general_mode_rejects_unanchored_solution(unit_circle):
    grid = geo.curve_grid(unit_circle, 32)
    density = bie.Density2D(grid=grid, values=np.ones(32, complex))
    xs = geo.boundary_sample(unit_circle, 0.0)
    sol = pot.make_subtraction_solution("green-helmholtz", xs, 5.0)
    rep = pot.Representation(
        family="helmholtz-combined", mode="general", u_sol=sol, k=5.0
    )
    x = geo.offset_point(xs, 0.5, "exterior")
    with pytest.raises(ValueError, match="anchoring constraint"):
        pot.eval_potential(rep, unit_circle, density, x, xs)


def test_outgoing_wave_decay(star, star_kress_density):
    """|u| sqrt(|x|) stays bounded far out (outgoing radiation)."""
    rep = pot.Representation(family="helmholtz-combined", mode="standard", k=15.0)
    vals = []
    for R in (50.0, 100.0):
        x = np.array([R, 0.3])
        v = pot.eval_potential(rep, star, star_kress_density, x)
        vals.append(abs(v) * np.sqrt(R))
    assert vals[0] < 1.0 and vals[1] < 1.0
    assert abs(vals[0] - vals[1]) <= 0.5 * vals[0]


# ---------------------------------------------------------------------------
# 3D close evaluation
# ---------------------------------------------------------------------------
def test_3d_dsl_beats_standard_at_A(sphere2, sphere_neumann_density):
    A = 2.0 * POINT_A / np.linalg.norm(POINT_A)
    param, _, _ = geo.nearest_boundary_point(sphere2, A * 1.000001)
    xs = geo.boundary_sample(sphere2, param)
    x = geo.offset_point(xs, 1e-3, "exterior")
    errs = {}
    for mode in ("standard", "dsl"):
        rep = pot.Representation(family="laplace-slp", mode=mode)
        val = pot.eval_potential(rep, sphere2, sphere_neumann_density, x, xs)
        errs[mode] = abs(val - monopole3d(x))
    assert errs["dsl"] < errs["standard"]
