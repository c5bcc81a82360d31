"""
Constructive realizers for the pattern families with known answers.

Each realizer returns a :class:`~ssvpkit.types.RealizationResult`. Closed forms
are used where they exist; the remaining cases go through :mod:`ssvpkit.flow`.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from ssvpkit.classify import SIGMA_GAP_TOL, allows_all_nonzero_lists
from ssvpkit.config import SolverConfig
from ssvpkit.errors import InfeasibleError, InvalidInputError
from ssvpkit.flow import liberate, liberation_direction, superpattern_realize
from ssvpkit.numerics import DenseMatrix, SigmaList, as_matrix, direct_sum, lanczos_jacobi
from ssvpkit.pattern import (
    Pattern,
    digraph_has_cycle,
    matching_permutation,
    pattern_of,
    term_rank,
)
from ssvpkit.types import RealizationResult, build_result

logger = logging.getLogger(__name__)

ZERO_SIGMA_TOL = 1e-12
ORTHONORMAL_TOL = 1e-10

C6 = Pattern(3, 3, (1, 1, 0, 0, 1, 1, 1, 0, 1))

# Angle pairs (theta, phi) tried in order for the sigma_3 = 0 family of C6.
_C6_ANGLES: tuple[tuple[float, float], ...] = (
    (math.pi / 5, math.pi / 3),
    (math.pi / 7, math.pi / 4),
    (2 * math.pi / 7, math.pi / 6),
)


def _as_sigmas(values: SigmaList | Sequence[float]) -> SigmaList:
    return values if isinstance(values, SigmaList) else SigmaList.from_values(values)


def _distinct(values: SigmaList) -> bool:
    vals = values.as_array()
    scale = float(vals[0]) if vals.size and vals[0] > 0 else 1.0
    return bool(np.all(np.abs(np.diff(vals)) > SIGMA_GAP_TOL * scale))


def _relabel(
    result: RealizationResult, requested: SigmaList, method: str, pattern: Pattern
) -> RealizationResult:
    return build_result(
        result.matrix,
        requested,
        method,
        pattern,
        iterations=result.iterations,
        residual=result.residual,
        factor_defect=result.factor_defect,
        ssvp=result.ssvp,
        notes=result.notes,
    )


def _permute_cols(P: Pattern, order: Sequence[int]) -> Pattern:
    return Pattern.from_array(P.to_array()[:, list(order)])


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def staircase_pattern(rows: int) -> Pattern:
    """The rows x (rows + 1) pattern with ones at (i, i) and (i, i + 1)."""
    arr = np.zeros((rows, rows + 1), dtype=np.int64)
    for i in range(rows):
        arr[i, i] = arr[i, i + 1] = 1
    return Pattern.from_array(arr)


def leading_minors(M: object) -> np.ndarray:
    """
    Leading principal minors D_0 = 1, D_1, ..., D_k of a symmetric tridiagonal matrix.

    Uses D_i = m_ii D_{i-1} - m_{i-1,i}^2 D_{i-2}.
    """
    arr = as_matrix(M, "M")
    k = arr.shape[0]
    minors = np.ones(k + 1)
    for i in range(1, k + 1):
        minors[i] = arr[i - 1, i - 1] * minors[i - 1]
        if i >= 2:
            minors[i] -= arr[i - 2, i - 1] ** 2 * minors[i - 2]
    return minors


def realize_path(sigmas: SigmaList | Sequence[float]) -> RealizationResult:
    """
    Realize n distinct positive singular values with the n x (n+1) staircase pattern.

    Builds the Jacobi matrix M with eigenvalues sigma_i^2 and 0, then the upper
    bidiagonal B with B^T B = M from the ratios of leading principal minors:
    b_ii = sqrt(D_i / D_{i-1}) and b_{i,i+1} = m_{i,i+1} / b_ii.

    Raises:
        InfeasibleError: the values repeat or one of them is zero.
    """
    requested = _as_sigmas(sigmas)
    n = len(requested)
    if n == 0:
        raise InvalidInputError("realize_path needs at least one value")
    vals = requested.as_array()
    if vals[-1] <= ZERO_SIGMA_TOL * vals[0] or not _distinct(requested):
        raise InfeasibleError("path patterns need distinct nonzero singular values")

    jacobi = lanczos_jacobi(np.concatenate([vals**2, [0.0]]))
    minors = leading_minors(jacobi)
    out = np.zeros((n, n + 1))
    for i in range(n):
        out[i, i] = math.sqrt(minors[i + 1] / minors[i])
        out[i, i + 1] = jacobi[i, i + 1] / out[i, i]
    logger.debug("[realize] path n=%d", n)
    return build_result(out, requested, "path", staircase_pattern(n))


def _bidiagonal_pair(sigma: float, tau: float) -> tuple[float, float, float]:
    """Positive (a, b, c) with [[a, b], [0, c]] having singular values sigma != tau."""
    m = lanczos_jacobi([sigma**2, tau**2])
    a = math.sqrt(m[0, 0])
    b = m[0, 1] / a
    c = math.sqrt(m[1, 1] - m[0, 1] ** 2 / m[0, 0])
    return a, b, c


# ---------------------------------------------------------------------------
# Orthonormal rows and all-ones blocks
# ---------------------------------------------------------------------------


def nowhere_zero_orthogonal(k: int) -> DenseMatrix:
    """A k x k orthogonal matrix with no zero entry."""
    if k < 1:
        raise InvalidInputError(f"k must be positive (got {k})")
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        return np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    return np.eye(k) - (2.0 / k) * np.ones((k, k))


def realize_orthonormal_scaled(Q: object, sigmas: SigmaList | Sequence[float]) -> RealizationResult:
    """
    Scale the rows of a row-orthonormal Q by the sigmas: diag(sigma) Q.

    The output keeps the pattern of Q and has exactly the requested singular values.
    """
    q = as_matrix(Q, "Q")
    m = q.shape[0]
    if m > q.shape[1] or not np.allclose(q @ q.T, np.eye(m), rtol=0, atol=ORTHONORMAL_TOL):
        raise InvalidInputError("Q must have orthonormal rows")
    values = [float(v) for v in sigmas]
    if len(values) != m:
        raise InvalidInputError(f"need {m} singular values (got {len(values)})")
    if any(v <= 0 for v in values):
        raise InvalidInputError("singular values must be positive")
    return build_result(np.diag(values) @ q, SigmaList.from_values(values), "ortho", pattern_of(q))


def realize_all_ones_block(P: Pattern, sigmas: SigmaList | Sequence[float]) -> RealizationResult:
    """Realize any positive list on a pattern that is [J | O] up to permutation."""
    if P.rows > P.cols:
        result = realize_all_ones_block(P.transpose(), sigmas)
        return build_result(result.matrix.T, result.requested_sigmas, "all-ones", P)
    requested = _as_sigmas(sigmas)
    if len(requested) != P.rows:
        raise InvalidInputError(f"need {P.rows} singular values (got {len(requested)})")
    if requested.as_array()[-1] <= 0:
        raise InvalidInputError("all-ones blocks are realized for positive lists only")
    if not allows_all_nonzero_lists(P):
        raise InfeasibleError("pattern is not an all-ones block padded with zero columns")
    arr = P.to_array()
    cols = np.flatnonzero(arr.any(axis=0))
    rows = nowhere_zero_orthogonal(cols.size)[: P.rows]
    out = np.zeros(P.shape)
    out[:, cols] = requested.as_array()[:, None] * rows
    return build_result(out, requested, "all-ones", P)


# ---------------------------------------------------------------------------
# The 3 x 3 cycle pattern
# ---------------------------------------------------------------------------


def c6_zero_direction(a: float, b: float, c: float, d: float) -> tuple[DenseMatrix, DenseMatrix]:
    """
    Skew pair (K, L) for N = [[a, b, 0], [0, 0, c], [0, 0, d]].

    K N + N L is supported on (1, 1) and (2, 0).
    """
    k = np.array(
        [
            [0.0, (d**2 - b**2) * c, (a**2 - c**2) * d],
            [(b**2 - d**2) * c, 0.0, 0.0],
            [(c**2 - a**2) * d, 0.0, 0.0],
        ]
    )
    l_ = np.array(
        [
            [0.0, 0.0, (b**2 - d**2) * a],
            [0.0, 0.0, (c**2 - a**2) * b],
            [(d**2 - b**2) * a, (a**2 - c**2) * b, 0.0],
        ]
    )
    return k, l_


def c6_repeated_direction(a: float, b: float) -> tuple[DenseMatrix, DenseMatrix]:
    """
    Skew pair (K, L) for M = [[a, b, 0], [0, c, 0], [0, 0, 1]].

    K M + M L is supported on (1, 2) and (2, 0).
    """
    k = np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    l_ = np.array(
        [
            [0.0, 0.0, (1 - b**2) / a],
            [0.0, 0.0, b],
            [(b**2 - 1) / a, -b, 0.0],
        ]
    )
    return k, l_


def realize_c6(
    sigmas: SigmaList | Sequence[float], cfg: SolverConfig | None = None
) -> RealizationResult:
    """
    Realize three singular values with the 3 x 3 cycle pattern C6.

    Feasible exactly when sigma_2 > 0 and sigma_1 != sigma_3. These two conditions
    are checked on the list as given; the list must then be non-increasing.

    Raises:
        InfeasibleError: sigma_2 is zero or sigma_1 equals sigma_3.
    """
    values = [float(v) for v in sigmas]
    if len(values) != 3:
        raise InvalidInputError(f"realize_c6 needs three values (got {len(values)})")
    if any(not math.isfinite(v) or v < 0 for v in values):
        raise InvalidInputError("singular values must be finite and nonnegative")
    s1, s2, s3 = values
    scale = max(values) if max(values) > 0 else 1.0
    if s2 <= ZERO_SIGMA_TOL * scale:
        raise InfeasibleError("sigma2 == 0")
    if abs(s1 - s3) <= SIGMA_GAP_TOL * scale:
        raise InfeasibleError("sigma1 == sigma3")
    requested = SigmaList(tuple(values))
    cfg = cfg or SolverConfig()
    same12 = s1 - s2 <= SIGMA_GAP_TOL * scale
    same23 = s2 - s3 <= SIGMA_GAP_TOL * scale

    if s3 <= ZERO_SIGMA_TOL * scale:
        if same12:
            rotation = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [-1.0, 0.0, 1.0]])
            out = (s1 / math.sqrt(3.0)) * rotation
            return build_result(out, requested, "c6-closed-form", C6)
        return _c6_with_zero(s1, s2, requested, cfg)
    if not (same12 or same23):
        return _relabel(realize_distinct(C6, requested, cfg), requested, "c6-distinct", C6)
    return _c6_repeated(requested, same12, cfg)


def _c6_with_zero(
    s1: float, s2: float, requested: SigmaList, cfg: SolverConfig
) -> RealizationResult:
    for theta, phi in _C6_ANGLES:
        a, b = s1 * math.cos(theta), s1 * math.sin(theta)
        c, d = s2 * math.cos(phi), s2 * math.sin(phi)
        if abs(a**2 - c**2) >= 1e-6 * s1**2:
            break
    else:
        raise InfeasibleError("no angle pair separates a^2 from c^2")
    n_mat = np.array([[a, b, 0.0], [0.0, 0.0, c], [0.0, 0.0, d]])
    k, l_ = c6_zero_direction(a, b, c, d)
    logger.info("[realize] c6 with a zero value: liberating N")
    result = liberate(n_mat, k @ n_mat + n_mat @ l_, cfg)
    return _relabel(result, requested, "c6-liberation", C6)


def _c6_repeated(requested: SigmaList, top_repeated: bool, cfg: SolverConfig) -> RealizationResult:
    s1, s2, s3 = requested.values
    scale, odd = (s1, s3) if top_repeated else (s3, s1)
    a, b, c = _bidiagonal_pair(odd / scale, 1.0)
    m_mat = direct_sum(np.array([[a, b], [0.0, c]]), np.ones((1, 1)))
    k, l_ = c6_repeated_direction(a, b)
    logger.info("[realize] c6 with a repeated value: liberating M")
    result = liberate(m_mat, k @ m_mat + m_mat @ l_, cfg)
    scaled = build_result(
        scale * result.matrix,
        requested,
        "c6-liberation",
        C6,
        iterations=result.iterations,
        residual=scale * result.residual,
        factor_defect=result.factor_defect,
        ssvp=result.ssvp,
    )
    return scaled


# ---------------------------------------------------------------------------
# Distinct values and cycles with a zero value
# ---------------------------------------------------------------------------


def realize_distinct(
    P: Pattern, sigmas: SigmaList | Sequence[float], cfg: SolverConfig | None = None
) -> RealizationResult:
    """
    Realize distinct positive values on a pattern of full term rank.

    A maximum matching is moved to the diagonal, [diag(sigma) | O] is pushed to the
    permuted pattern with :func:`~ssvpkit.flow.superpattern_realize`, and the columns
    are moved back.
    """
    if P.rows > P.cols:
        result = realize_distinct(P.transpose(), sigmas, cfg)
        return build_result(
            result.matrix.T,
            result.requested_sigmas,
            "distinct",
            P,
            iterations=result.iterations,
            residual=result.residual,
            factor_defect=result.factor_defect,
        )
    requested = _as_sigmas(sigmas)
    m = P.rows
    if len(requested) != m:
        raise InvalidInputError(f"need {m} singular values (got {len(requested)})")
    vals = requested.as_array()
    if vals[-1] <= ZERO_SIGMA_TOL * vals[0] or not _distinct(requested):
        raise InvalidInputError("realize_distinct needs distinct positive values")
    if term_rank(P) < m:
        raise InfeasibleError("pattern has term rank below its row count")
    order = matching_permutation(P)
    start = np.zeros(P.shape)
    start[np.arange(m), np.arange(m)] = vals
    result = superpattern_realize(start, _permute_cols(P, order), cfg)
    out = np.zeros(P.shape)
    out[:, order] = result.matrix
    return build_result(
        out,
        requested,
        "distinct",
        P,
        iterations=result.iterations,
        residual=result.residual,
        factor_defect=result.factor_defect,
    )


def cycle_pattern(order: int) -> Pattern:
    """
    Square pattern whose bigraph is one cycle through all 2 * order vertices.

    Ones on the diagonal and at (i + 1 mod order, i). For order 2 this is J.
    """
    arr = np.zeros((order, order), dtype=np.int64)
    for i in range(order):
        arr[i, i] = 1
        arr[(i + 1) % order, i] = 1
    return Pattern.from_array(arr)


def realize_cycle_with_zero(
    n: int, sigmas: SigmaList | Sequence[float], cfg: SolverConfig | None = None
) -> RealizationResult:
    """
    Realize distinct values with exactly one zero on a 2n-cycle pattern.

    Orders 1 and 2 both give the 2 x 2 matrix (sigma/2) J. From order 3 on, the
    start is the transposed path realization of the middle values plus a
    one-row block carrying the largest value; liberation closes the cycle.
    """
    if n < 1:
        raise InvalidInputError(f"n must be positive (got {n})")
    order = max(n, 2)
    requested = _as_sigmas(sigmas)
    if len(requested) != order:
        raise InvalidInputError(f"need {order} singular values (got {len(requested)})")
    vals = requested.as_array()
    scale = float(vals[0]) if vals[0] > 0 else 1.0
    zeros = int(np.count_nonzero(vals <= ZERO_SIGMA_TOL * scale))
    if zeros != 1 or not _distinct(requested):
        raise InfeasibleError("this construction needs distinct values with exactly one zero")
    cfg = cfg or SolverConfig()
    target = cycle_pattern(order)
    if order == 2:
        return build_result((vals[0] / 2.0) * np.ones((2, 2)), requested, "cycle", target)

    path = realize_path(SigmaList(tuple(vals[1:-1]))).matrix.T
    block = vals[0] * np.ones((1, 2)) / math.sqrt(2.0)
    start = direct_sum(path, block)
    wanted = np.zeros((order, order), dtype=np.int64)
    wanted[order - 2, order - 2] = 1
    wanted[0, order - 1] = 1
    direction = liberation_direction(start, Pattern.from_array(wanted), cfg)
    result = liberate(start, direction, cfg)
    if pattern_of(result.matrix) != target:
        logger.info("[realize] cycle: filling the rest of the cycle pattern")
        result = superpattern_realize(result.matrix, target, cfg)
    return _relabel(result, requested, "cycle", target)


def allows_zero_with_distinct(P: Pattern) -> bool:
    """
    True iff P allows 0 together with distinct positive singular values.

    P must be square with full term rank. After a maximum matching is moved to
    the diagonal, the answer is whether the digraph of P has a cycle.
    """
    if P.rows != P.cols:
        raise InvalidInputError("allows_zero_with_distinct needs a square pattern")
    if term_rank(P) < P.rows:
        raise InvalidInputError("allows_zero_with_distinct needs full term rank")
    return digraph_has_cycle(_permute_cols(P, matching_permutation(P)))
