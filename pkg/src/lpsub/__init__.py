"""Layer potentials for Laplace and Helmholtz with density-subtraction
modified representations for the close evaluation problem."""

from .bie import (
    Density2D,
    DensitySH,
    density_interp,
    load_density,
    save_density,
    solve_galerkin_3d,
    solve_helmholtz_kress_2d,
    solve_helmholtz_pws_2d,
    solve_laplace_dirichlet_2d,
    solve_laplace_neumann_2d,
)
from .geometry import (
    BoundarySample,
    Curve2D,
    Surface3D,
    boundary_sample,
    circle,
    fourier_curve,
    kite,
    nearest_boundary_point,
    offset_point,
    parse_shape,
    rotate_to_pole,
    sphere,
    star,
)
from .identities import IdentityCase, builtin_cases, identity_lhs, identity_residual
from .kernels import KernelSpec, kernel_eval
from .potentials import (
    Representation,
    SubtractionSolution,
    eval_potential,
    make_subtraction_solution,
)
from .quadrature import (
    GLRule,
    KressWeights,
    PTRGrid,
    SphereGrid,
    gauss_legendre,
    kress_weights,
    ptr_integrate,
    sphere_grid,
    sphere_integrate,
    three_step_eval,
)

__version__ = "0.1.0"
