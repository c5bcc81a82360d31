"""
SSVP verification matrices and the SSVP decision.

A has the SSVP iff the columns of phi_A (the columns of Psi_A at zero entries of A)
are linearly independent. Rows of Psi_A are the below-diagonal entries of
A^T X - X^T A (the "n" block) followed by those of X A^T - A X^T (the "m" block);
columns are entry positions (p, q) in row-major order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, NamedTuple, Sequence

import numpy as np
import scipy.linalg

from ssvpkit.errors import BorderlineRankError, InvalidInputError, NotASuperpatternError
from ssvpkit.numerics import (
    DEFAULT_RANK_TOL,
    DenseMatrix,
    RationalMatrix,
    as_matrix,
    exact_nullspace,
    exact_pivot_rows,
    exact_rank,
    is_rational,
    lower_positions,
    nullspace,
    numeric_pivot_rows,
    rank,
)
from ssvpkit.pattern import Pattern, is_superpattern, pattern_of

logger = logging.getLogger(__name__)

HAS_SSVP = "has-SSVP"
LACKS_SSVP = "lacks-SSVP"
CERTIFICATE_TOL = 1e-10
BORDERLINE_RATIO = 1e3

Mode = Literal["numeric", "exact-when-rational"]
MODES: tuple[str, ...] = ("numeric", "exact-when-rational")


class SkewEntry(NamedTuple):
    """Row label of a verification matrix: block "n" or "m" and a below-diagonal (i, j)."""

    block: str
    i: int
    j: int


@dataclass(frozen=True)
class VerificationMatrix:
    matrix: DenseMatrix
    row_index: tuple[SkewEntry, ...]
    col_index: tuple[tuple[int, int], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def column_of(self, position: tuple[int, int]) -> int:
        return self.col_index.index(tuple(position))

    def row_of(self, label: SkewEntry) -> int:
        return self.row_index.index(label)


@dataclass(frozen=True)
class SsvpCertificate:
    """Outcome of an SSVP decision with its witness."""

    verdict: str
    pivot_rows: tuple[int, ...] | None = None
    Y: DenseMatrix | None = None
    residuals: tuple[float, float, float] | None = None
    exact: bool = False
    rank: int = 0
    column_count: int = 0
    relative_to: Pattern | None = field(default=None, repr=False)

    @property
    def has_ssvp(self) -> bool:
        return self.verdict == HAS_SSVP


class CertificateCheck(NamedTuple):
    valid: bool
    residuals: tuple[float, float, float]


def vec_lower(S: object) -> np.ndarray:
    """Below-diagonal entries of a square matrix, column by column."""
    arr = as_matrix(S, "S")
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"vec_lower needs a square matrix (got {arr.shape})")
    return np.array([arr[i, j] for i, j in lower_positions(arr.shape[0])], dtype=np.float64)


def _row_labels(m: int, n: int) -> tuple[SkewEntry, ...]:
    return tuple(SkewEntry("n", i, j) for i, j in lower_positions(n)) + tuple(
        SkewEntry("m", i, j) for i, j in lower_positions(m)
    )


def _psi_rows(
    entry: Callable[[int, int], object],
    m: int,
    n: int,
    cols: Sequence[tuple[int, int]],
    zero: object,
) -> list[list[object]]:
    """Coefficient of x_pq in each SSVP equation, for any number type."""
    rows: list[list[object]] = []
    for i, j in lower_positions(n):
        rows.append(
            [
                (entry(p, i) if q == j else zero) - (entry(p, j) if q == i else zero)
                for p, q in cols
            ]
        )
    for i, j in lower_positions(m):
        rows.append(
            [
                (entry(j, q) if p == i else zero) - (entry(i, q) if p == j else zero)
                for p, q in cols
            ]
        )
    return rows


def _all_positions(m: int, n: int) -> list[tuple[int, int]]:
    return [(p, q) for p in range(m) for q in range(n)]


def _build(a: DenseMatrix, cols: Sequence[tuple[int, int]]) -> VerificationMatrix:
    m, n = a.shape
    rows = _psi_rows(lambda r, c: float(a[r, c]), m, n, cols, 0.0)
    matrix = np.array(rows, dtype=np.float64).reshape(len(rows), len(cols))
    return VerificationMatrix(matrix, _row_labels(m, n), tuple(cols))


def _build_exact(a: RationalMatrix, cols: Sequence[tuple[int, int]]) -> RationalMatrix:
    rows = _psi_rows(lambda r, c: a.entries[r * a.cols + c], a.rows, a.cols, cols, Fraction(0))
    return RationalMatrix(len(rows), len(cols), tuple(x for row in rows for x in row))


def build_psi(A: object) -> VerificationMatrix:
    """Full verification matrix Psi_A, of shape (C(n,2) + C(m,2)) x mn."""
    a = as_matrix(A, "A")
    if a.size == 0:
        raise InvalidInputError("build_psi needs a nonempty matrix")
    return _build(a, _all_positions(*a.shape))


def build_phi(A: object) -> VerificationMatrix:
    """Columns of Psi_A at the zero entries of A."""
    a = as_matrix(A, "A")
    return _build(a, pattern_of(a).zeros())


def build_phi_wrt(A: object, S: Pattern) -> VerificationMatrix:
    """Columns of Psi_A at the zero entries of the superpattern S."""
    a = as_matrix(A, "A")
    _require_superpattern(a, S)
    return _build(a, S.zeros())


def _require_superpattern(a: DenseMatrix, S: Pattern) -> None:
    if S.shape != a.shape or not is_superpattern(S, pattern_of(a)):
        raise NotASuperpatternError("S must be a superpattern of the pattern of A")


# ---------------------------------------------------------------------------
# Decision
# ---------------------------------------------------------------------------


def check_ssvp(A: object, mode: Mode = "numeric") -> SsvpCertificate:
    """
    Decide whether A has the SSVP.

    In "exact-when-rational" mode, matrices whose entries are small-denominator
    rationals are decided with exact arithmetic. In "numeric" mode a borderline
    rank escalates to exact arithmetic when possible.

    Raises:
        BorderlineRankError: the rank is too close to call and A is not rational.
    """
    a = as_matrix(A, "A")
    return _decide(a, pattern_of(a), mode, relative=False)


def check_ssvp_wrt(A: object, S: Pattern, mode: Mode = "numeric") -> SsvpCertificate:
    """Decide whether A has the SSVP with respect to the superpattern S."""
    a = as_matrix(A, "A")
    _require_superpattern(a, S)
    return _decide(a, S, mode, relative=True)


def _decide(a: DenseMatrix, support: Pattern, mode: str, *, relative: bool) -> SsvpCertificate:
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES} (got {mode!r})")
    cols = support.zeros()
    k = len(cols)
    rel = support if relative else None
    if k == 0:
        return SsvpCertificate(HAS_SSVP, pivot_rows=(), rank=0, column_count=0, relative_to=rel)

    rational = is_rational(a)
    use_exact = mode == "exact-when-rational" and rational
    phi = _build(a, cols)
    if not use_exact:
        r = rank(phi.matrix)
        ratio = _borderline_ratio(phi.matrix, r, k)
        if ratio < BORDERLINE_RATIO:
            if not rational:
                raise BorderlineRankError(ratio)
            logger.info(
                "[verify] borderline rank (ratio=%.3g); escalating to exact arithmetic", ratio
            )
            use_exact = True

    if use_exact:
        exact_phi = _build_exact(RationalMatrix.from_dense(a), cols)
        r = exact_rank(exact_phi)
        if r == k:
            pivots = tuple(exact_pivot_rows(exact_phi))
            return SsvpCertificate(
                HAS_SSVP, pivot_rows=pivots, exact=True, rank=r, column_count=k, relative_to=rel
            )
        y = np.array(exact_nullspace(exact_phi)[0], dtype=np.float64)
    else:
        if r == k:
            pivots = tuple(numeric_pivot_rows(phi.matrix))
            return SsvpCertificate(
                HAS_SSVP, pivot_rows=pivots, rank=r, column_count=k, relative_to=rel
            )
        basis = nullspace(phi.matrix, DEFAULT_RANK_TOL * max(phi.shape))
        y = _normalize(basis[:, 0])

    Y = np.zeros_like(a)
    for (p, q), value in zip(cols, y):
        Y[p, q] = value
    check = validate_certificate(a, Y, support)
    return SsvpCertificate(
        LACKS_SSVP,
        Y=Y,
        residuals=check.residuals,
        exact=use_exact,
        rank=r,
        column_count=k,
        relative_to=rel,
    )


def _borderline_ratio(matrix: DenseMatrix, r: int, k: int) -> float:
    if r < k - 1 or matrix.shape[0] == 0:
        return float("inf")
    s = np.zeros(k)
    vals = scipy.linalg.svdvals(matrix)
    s[: vals.size] = vals[:k]
    if r == k:
        threshold = DEFAULT_RANK_TOL * max(matrix.shape) * s[0]
        return float(s[k - 1] / threshold) if threshold > 0 else float("inf")
    if k < 2 or s[k - 1] == 0.0:
        return float("inf")
    return float(s[k - 2] / s[k - 1])


def _normalize(y: np.ndarray) -> np.ndarray:
    y = y / np.linalg.norm(y)
    big = np.flatnonzero(np.abs(y) > 1e-8)
    if big.size and y[big[0]] < 0:
        y = -y
    return y


def certificate_residuals(
    A: object, Y: object, S: Pattern | None = None
) -> tuple[float, float, float]:
    """(||A^T Y - Y^T A||, ||Y A^T - A Y^T||, ||S o Y||) in the Frobenius norm."""
    a = as_matrix(A, "A")
    y = as_matrix(Y, "Y")
    if a.shape != y.shape:
        raise InvalidInputError(f"A and Y shapes differ: {a.shape} vs {y.shape}")
    support = pattern_of(a) if S is None else S
    if support.shape != a.shape:
        raise InvalidInputError("pattern shape does not match A")
    aty = a.T @ y
    yat = y @ a.T
    return (
        float(np.linalg.norm(aty - aty.T)),
        float(np.linalg.norm(yat - yat.T)),
        float(np.linalg.norm(support.mask() * y)),
    )


def validate_certificate(A: object, Y: object, S: Pattern | None = None) -> CertificateCheck:
    """
    Check that Y certifies the failure of the SSVP (relative to S, or to the pattern of A).

    Valid iff Y != O and all three residuals are at most 1e-10 * ||A|| * ||Y||.
    """
    residuals = certificate_residuals(A, Y, S)
    norm_a = float(np.linalg.norm(as_matrix(A)))
    norm_y = float(np.linalg.norm(as_matrix(Y)))
    bound = CERTIFICATE_TOL * norm_a * norm_y
    valid = norm_y > 0 and all(r <= bound for r in residuals)
    return CertificateCheck(valid, residuals)
