"""Construction and verification of cohomogeneity-one Kahler gradient Ricci solitons."""

from .contact import (
    ContactStructure,
    DeformParams,
    FramedOrbit,
    acms_residual,
    compose_deform,
    compose_deform_direct,
    framed_orbit,
    homothety,
    induce_level_set,
    model_space,
    phi_sectional,
    pm_deform,
    symmetry_residuals,
)
from .curvature import (
    RicciDiag,
    ricci_ansatz,
    ricci_from_shape,
    shape_operator,
    slice_ricci,
    submersion_curvature,
)
from .estimators import KahlerSolitonSolver, SolitonResidualTransformer
from .exceptions import ConfigError, ProfileError, QuadratureError
from .io import parse_profile_csv
from .profiles import (
    AnsatzParams,
    ProfileGrid,
    SProfile,
    build_grid,
    derivative,
    from_s,
    gaussian_profile,
    hyperbolic_profile,
    to_s,
)
from .soliton import (
    ClosureReport,
    SolitonResidual,
    closure_check,
    construct,
    hyperbolic_solve,
    oracle_integrate,
    residual_full,
    residual_kahler,
    solve_quadrature,
)

__version__ = "0.1.0"
