"""
ssvpkit: the strong spectral property for singular values (SSVP).

Decide the SSVP, classify matrices by closed-form rules, and realize singular
value lists on prescribed zero-nonzero patterns.

Quick start::

    import numpy as np
    from ssvpkit import check_ssvp, realize_c6

    check_ssvp(np.diag([1.0, 1.0])).verdict     # "lacks-SSVP"
    realize_c6([2.0, 1.0, 0.0]).matrix          # 3 x 3 cycle pattern
"""

from ssvpkit._version import __version__
from ssvpkit.classify import (
    ClosedFormVerdict,
    Transform,
    allows_all_nonzero_lists,
    check_direct_sum_conditions,
    classify_ssvp,
    compose_transforms,
    equivalence_transform,
    zero_pattern_only,
)
from ssvpkit.config import SolverConfig
from ssvpkit.errors import (
    AmbiguousPatternError,
    BorderlineRankError,
    DegenerateSpectrumError,
    InfeasibleError,
    InvalidInputError,
    MalformedInputError,
    NoConvergenceError,
    NotASuperpatternError,
    NotInTangentSpaceError,
    NumericalBreakdownError,
    SsvpkitError,
    SsvpRequiredError,
    TargetTooFarError,
)
from ssvpkit.flow import (
    TangentSpace,
    bifurcate,
    liberate,
    liberation_direction,
    orbit_jacobian,
    ssvp_via_tangent,
    superpattern_realize,
    tangent_basis,
)
from ssvpkit.numerics import RationalMatrix, SigmaList, singular_values
from ssvpkit.pattern import Pattern, pattern_of, term_rank
from ssvpkit.realize import (
    allows_zero_with_distinct,
    nowhere_zero_orthogonal,
    realize_all_ones_block,
    realize_c6,
    realize_cycle_with_zero,
    realize_distinct,
    realize_orthonormal_scaled,
    realize_path,
)
from ssvpkit.types import RealizationResult
from ssvpkit.verify import (
    HAS_SSVP,
    LACKS_SSVP,
    SsvpCertificate,
    build_phi,
    build_phi_wrt,
    build_psi,
    check_ssvp,
    check_ssvp_wrt,
    validate_certificate,
)

__all__ = [
    "__version__",
    # verification
    "HAS_SSVP",
    "LACKS_SSVP",
    "SsvpCertificate",
    "build_psi",
    "build_phi",
    "build_phi_wrt",
    "check_ssvp",
    "check_ssvp_wrt",
    "validate_certificate",
    # classification
    "ClosedFormVerdict",
    "Transform",
    "classify_ssvp",
    "check_direct_sum_conditions",
    "equivalence_transform",
    "compose_transforms",
    "allows_all_nonzero_lists",
    "zero_pattern_only",
    # values and patterns
    "Pattern",
    "RationalMatrix",
    "SigmaList",
    "pattern_of",
    "singular_values",
    "term_rank",
    # realization
    "RealizationResult",
    "SolverConfig",
    "TangentSpace",
    "allows_zero_with_distinct",
    "bifurcate",
    "liberate",
    "liberation_direction",
    "nowhere_zero_orthogonal",
    "orbit_jacobian",
    "realize_all_ones_block",
    "realize_c6",
    "realize_cycle_with_zero",
    "realize_distinct",
    "realize_orthonormal_scaled",
    "realize_path",
    "ssvp_via_tangent",
    "superpattern_realize",
    "tangent_basis",
    # errors
    "SsvpkitError",
    "InvalidInputError",
    "MalformedInputError",
    "NotASuperpatternError",
    "DegenerateSpectrumError",
    "NotInTangentSpaceError",
    "NumericalBreakdownError",
    "AmbiguousPatternError",
    "BorderlineRankError",
    "InfeasibleError",
    "SsvpRequiredError",
    "NoConvergenceError",
    "TargetTooFarError",
]
