"""
Result types shared by the realizers and the continuation solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ssvpkit.errors import AmbiguousPatternError
from ssvpkit.numerics import DenseMatrix, SigmaList, as_matrix, singular_values
from ssvpkit.pattern import Pattern, pattern_of


@dataclass(frozen=True)
class RealizationResult:
    """
    A matrix realizing a singular value list, with its diagnostics.

    ``sigma_error`` is the largest deviation between achieved and requested values,
    relative to the largest requested value. ``pattern_ok`` is True when the matrix
    has exactly ``target_pattern`` (no entry in the ambiguity band).
    """

    matrix: DenseMatrix
    achieved_sigmas: SigmaList
    requested_sigmas: SigmaList
    sigma_error: float
    pattern_ok: bool
    method: str
    target_pattern: Pattern | None = None
    iterations: int = 0
    residual: float = 0.0
    factor_defect: float = 0.0
    ssvp: bool | None = None
    notes: tuple[str, ...] = field(default=())

    def __repr__(self) -> str:
        return (
            f"RealizationResult(method={self.method!r}, shape={self.matrix.shape}, "
            f"sigma_error={self.sigma_error:.2e}, pattern_ok={self.pattern_ok})"
        )


def sigma_error(achieved: Sequence[float], requested: Sequence[float]) -> float:
    got = np.asarray(list(achieved), dtype=np.float64)
    want = np.asarray(list(requested), dtype=np.float64)
    if got.shape != want.shape:
        return float("inf")
    scale = float(want.max()) if want.size and want.max() > 0 else 1.0
    return float(np.max(np.abs(got - want)) / scale) if want.size else 0.0


def build_result(
    matrix: object,
    requested: SigmaList,
    method: str,
    target_pattern: Pattern | None = None,
    **extra: object,
) -> RealizationResult:
    """Measure ``matrix`` against the request and wrap it."""
    arr = as_matrix(matrix)
    achieved = singular_values(arr)
    if target_pattern is None:
        ok = True
    else:
        try:
            ok = pattern_of(arr) == target_pattern
        except AmbiguousPatternError:
            ok = False
    return RealizationResult(
        matrix=arr,
        achieved_sigmas=achieved,
        requested_sigmas=requested,
        sigma_error=sigma_error(achieved, requested),
        pattern_ok=ok,
        method=method,
        target_pattern=target_pattern,
        **extra,  # type: ignore[arg-type]
    )
