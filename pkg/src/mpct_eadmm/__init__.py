"""Sparse extended-ADMM solver for the MPC-for-tracking formulation.

The package splits into an offline part (problem validation and
precomputation whose storage grows linearly in the prediction horizon), an
online matrix-free iteration, a dense reference oracle used for validation,
the inverted-pendulum closed-loop benchmark and a batch CLI.
"""

from .errors import (
    ArtifactError,
    ConfigError,
    DimensionMismatch,
    EmptyBox,
    FactorizationFailure,
    HorizonTooShort,
    MpctError,
    NonPositiveWeight,
    NumericalBreakdown,
    RankDeficientG2,
    SingularConfiguration,
    SingularKkt,
    SupportViolation,
)
from .offline import (
    OfflineData,
    WarmstartGain,
    build_offline,
    compute_banded_cholesky,
    compute_h1_inverse,
    compute_h3_inverse,
    compute_m2,
    compute_rho_upper_bound,
    compute_warmstart_gain,
    factor_block_tridiagonal,
)
from .problem import (
    CostWeights,
    MpctConfig,
    PenaltyParams,
    SystemModel,
    ValidatedProblem,
    build_rho,
    validate_problem,
)
from .solver import (
    SolveResult,
    SolverState,
    banded_forward_backward,
    cold_start,
    eadmm_solve,
    warmstart_predict,
)

__version__ = "0.1.0"

__all__ = [
    "ArtifactError",
    "ConfigError",
    "CostWeights",
    "DimensionMismatch",
    "EmptyBox",
    "FactorizationFailure",
    "HorizonTooShort",
    "MpctConfig",
    "MpctError",
    "NonPositiveWeight",
    "NumericalBreakdown",
    "OfflineData",
    "PenaltyParams",
    "RankDeficientG2",
    "SingularConfiguration",
    "SingularKkt",
    "SolveResult",
    "SolverState",
    "SupportViolation",
    "SystemModel",
    "ValidatedProblem",
    "WarmstartGain",
    "banded_forward_backward",
    "build_offline",
    "build_rho",
    "cold_start",
    "compute_banded_cholesky",
    "compute_h1_inverse",
    "compute_h3_inverse",
    "compute_m2",
    "compute_rho_upper_bound",
    "compute_warmstart_gain",
    "eadmm_solve",
    "factor_block_tridiagonal",
    "validate_problem",
    "warmstart_predict",
]
