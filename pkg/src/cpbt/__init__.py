"""Complete positivity tests and nearest-CP projection for symmetric tensors on R^2.

A symmetric tensor of order ``d`` on ``R^2`` is stored by its ``d + 1``
distinct entries ``a_k`` (the entry with ``k`` indices equal to 2). It is
completely positive (CP) when it is a sum of ``(a_i, b_i)^{(x)d}`` with
nonnegative ``a_i, b_i``.
"""

from .engine import (
    CpAnalysis,
    Tolerances,
    Uniqueness,
    Verdict,
    analyze,
    companion_roots,
    extension_value,
    solve_hankel_system_even,
    solve_hankel_system_odd,
    uniqueness_bounds,
    vandermonde_weights,
)
from .errors import CpbtError, InconsistentCertificate, SolverError
from .hankel import (
    HankelKind,
    HankelMatrix,
    PsdVerdict,
    build_hankel,
    numerical_rank,
    psd_check,
    psd_check_exact,
)
from .nearest import ConicProblem, NearestCpResult, nearest_cp, project_feasibility_check
from .tensor import (
    AVector,
    CpDecomposition,
    TmsVector,
    binomial_transform,
    inverse_binomial_transform,
    reconstruct,
    weighted_norm,
)

__version__ = "0.1.0"

__all__ = [
    "AVector",
    "TmsVector",
    "CpDecomposition",
    "binomial_transform",
    "inverse_binomial_transform",
    "weighted_norm",
    "reconstruct",
    "HankelKind",
    "HankelMatrix",
    "PsdVerdict",
    "build_hankel",
    "psd_check",
    "psd_check_exact",
    "numerical_rank",
    "Tolerances",
    "Verdict",
    "Uniqueness",
    "CpAnalysis",
    "analyze",
    "solve_hankel_system_odd",
    "solve_hankel_system_even",
    "extension_value",
    "companion_roots",
    "vandermonde_weights",
    "uniqueness_bounds",
    "ConicProblem",
    "NearestCpResult",
    "nearest_cp",
    "project_feasibility_check",
    "CpbtError",
    "InconsistentCertificate",
    "SolverError",
]
