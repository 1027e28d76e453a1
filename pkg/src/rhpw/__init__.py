"""Plane-wave asymptotics and a numerical Riemann-Hilbert oracle for the
defocusing NLS equation on the quarter plane with time-periodic boundary data."""

from .spectral_core import (
    AdmissibilityError,
    BranchCutError,
    BranchPoints,
    CriticalPoints,
    ParameterTriple,
    Phase,
    SectorError,
    TracingError,
    critical_points,
    derive_triple,
    derive_triple_from_alpha,
    eval_Delta,
    eval_g,
    eval_Omega,
    eval_X,
    trace_level_curve,
)
from .spectral_data import (
    AssumptionReport,
    BranchExpansion,
    SpectralData,
    build_data,
    build_r_infinity,
    eval_rb,
    extract_branch_coeffs,
    validate_assumptions,
)

__version__ = "0.1.0"
