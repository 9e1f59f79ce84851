"""Generalized Fibonacci zeta functions over real quadratic fields.

Computes the meromorphic continuation of Z_D^odd(s) and Z_D^even(s), the
Dirichlet series over odd- and even-indexed generalized Fibonacci numbers
(eps^n = (L_D(n) + F_D(n) sqrt(q)) / 2 with q the conductor of Q(sqrt(D))),
for squarefree D whose fundamental unit eps has norm -1, by three mutually
verifying methods (direct summation, binomial continuation, Gamma-series
continuation), together with the exact arithmetic of the underlying field
(fundamental unit, class number, L(1, chi_q)) and a mechanical verification
suite for the supporting identities.
"""

from .continuation import (
    CrossCheckReport,
    EvalResult,
    PoleSpec,
    cross_check,
    nearest_pole,
    pole_grid,
    pole_location,
    residue_at,
    residue_closed_form,
    z_binomial,
    z_direct,
    z_spectral,
    z_spectral_factored,
)
from .errors import (
    DomainError,
    NearPoleError,
    NoConvergence,
    PoleError,
    UnsupportedFieldError,
)
from .identities import run_identity_suite
from .qfield import (
    FieldContext,
    QuadInt,
    class_number,
    fundamental_unit,
    make_context,
)
from .sequences import (
    fibonacci,
    is_even_indexed_fib,
    is_odd_indexed_fib,
    lucas,
)
from .special import CNum

__version__ = "0.1.0"

__all__ = [
    "CNum",
    "CrossCheckReport",
    "DomainError",
    "EvalResult",
    "FieldContext",
    "NearPoleError",
    "NoConvergence",
    "PoleError",
    "PoleSpec",
    "QuadInt",
    "UnsupportedFieldError",
    "__version__",
    "class_number",
    "cross_check",
    "fibonacci",
    "fundamental_unit",
    "is_even_indexed_fib",
    "is_odd_indexed_fib",
    "lucas",
    "make_context",
    "nearest_pole",
    "pole_grid",
    "pole_location",
    "residue_at",
    "residue_closed_form",
    "run_identity_suite",
    "z_binomial",
    "z_direct",
    "z_spectral",
    "z_spectral_factored",
]
