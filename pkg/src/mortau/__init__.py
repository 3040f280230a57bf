"""mortau: time-limited H2-optimal model order reduction for LTI systems.

Reduce a real state-space system (A, B, C) to a small order r so that the
impulse response is matched over a finite horizon [0, tau].  The main entry
points are the reducer estimators (``LTIRKA``, ``IRKA``, ``TLTSIA``) or the
equivalent functions (``lt_irka``, ``irka``, ``tl_tsia``), with horizon
error metrics and first-order optimality diagnostics in ``mortau.metrics``.
"""

from .exceptions import (
    BenchmarkUnavailable,
    DegenerateShift,
    DimensionMismatch,
    IllConditionedProjection,
    InvalidInterpolationData,
    MortauError,
    NoConvergence,
    NonDiagonalizable,
    OverflowRisk,
    ParseError,
    RankCollapse,
    SingularShift,
    SylvesterFailure,
)
from .linalg import (
    EigenDecomposition,
    HorizonCache,
    OrthonormalBasis,
    ShiftedSolver,
    eigendecompose,
    exp_action,
    matrix_exponential,
    orthonormal_basis,
    shifted_solve,
    vanloan_limited_gramian,
)
from .metrics import (
    H2TauError,
    OptimalityResiduals,
    error_system,
    error_trajectory,
    h2tau_error,
    h2tau_norm,
    optimality_residuals,
    prop1_derivative_identity,
    prop1_inner_product_identity,
    prop1_norm_identity,
)
from .projection import (
    InterpolationData,
    ProjectionPair,
    TangentialErrorCheck,
    build_standard_spaces,
    build_time_limited_spaces,
    petrov_galerkin,
    verify_interpolation_errors,
)
from .reducers import (
    IRKA,
    LTIRKA,
    TLTSIA,
    IterationRecord,
    IterationTrace,
    irka,
    lt_irka,
    random_interpolation_data,
    shift_change_metric,
    tl_tsia,
)
from .systems import (
    PoleResidueForm,
    ReducedModel,
    StateSpaceSystem,
    impulse_response,
    pole_residue,
    transfer,
    transfer_limited,
    transfer_limited_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkUnavailable",
    "DegenerateShift",
    "DimensionMismatch",
    "EigenDecomposition",
    "H2TauError",
    "HorizonCache",
    "IRKA",
    "IllConditionedProjection",
    "InterpolationData",
    "InvalidInterpolationData",
    "IterationRecord",
    "IterationTrace",
    "LTIRKA",
    "MortauError",
    "NoConvergence",
    "NonDiagonalizable",
    "OptimalityResiduals",
    "OrthonormalBasis",
    "OverflowRisk",
    "ParseError",
    "PoleResidueForm",
    "ProjectionPair",
    "RankCollapse",
    "ReducedModel",
    "ShiftedSolver",
    "SingularShift",
    "StateSpaceSystem",
    "SylvesterFailure",
    "TLTSIA",
    "TangentialErrorCheck",
    "build_standard_spaces",
    "build_time_limited_spaces",
    "eigendecompose",
    "error_system",
    "error_trajectory",
    "exp_action",
    "h2tau_error",
    "h2tau_norm",
    "impulse_response",
    "irka",
    "lt_irka",
    "matrix_exponential",
    "optimality_residuals",
    "orthonormal_basis",
    "petrov_galerkin",
    "pole_residue",
    "prop1_derivative_identity",
    "prop1_inner_product_identity",
    "prop1_norm_identity",
    "random_interpolation_data",
    "shift_change_metric",
    "shifted_solve",
    "tl_tsia",
    "transfer",
    "transfer_limited",
    "transfer_limited_derivative",
    "vanloan_limited_gramian",
    "verify_interpolation_errors",
]
