"""
Closed-form SSVP characterizations, applied as an ordered rule chain.

Every negative verdict carries the witness matrix X from the corresponding
construction (X A^T and A^T X symmetric, A o X = O, X != O).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import networkx as nx
import numpy as np
import scipy.linalg

from ssvpkit.errors import InvalidInputError
from ssvpkit.numerics import DenseMatrix, as_matrix, direct_sum, nullspace, rank, singular_values
from ssvpkit.pattern import Pattern, konig_zero_block, pattern_of, term_rank
from ssvpkit.verify import HAS_SSVP, LACKS_SSVP, check_ssvp

logger = logging.getLogger(__name__)

NO_RULE = "no-rule-applies"
SIGMA_GAP_TOL = 1e-9

RULE_CATALOG: dict[str, str] = {
    "R1": "nowhere-zero",
    "R2": "zero-line",
    "R3": "row-vector",
    "R4": "diagonal",
    "R5": "bordered",
    "R6": "two-row",
    "R7": "term-rank",
    "R8": "direct-sum",
}


@dataclass(frozen=True)
class ClosedFormVerdict:
    verdict: str
    rule: str | None
    detail: str
    certificate: DenseMatrix | None = None

    @property
    def rule_name(self) -> str | None:
        return RULE_CATALOG.get(self.rule) if self.rule else None


class DirectSumReport(NamedTuple):
    a: bool
    b: bool
    c: bool
    d: bool
    verdict: str
    certificate: DenseMatrix | None


@dataclass(frozen=True)
class Transform:
    """One of the SSVP-preserving equivalences: transpose, permutations, sign flips."""

    kind: str
    data: tuple[int, ...] = ()

    KINDS = ("transpose", "row-perm", "col-perm", "row-signs", "col-signs")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise InvalidInputError(
                f"unknown transform {self.kind!r}; expected one of {self.KINDS}"
            )
        object.__setattr__(self, "data", tuple(int(v) for v in self.data))


def equivalence_transform(
    A: object, op: Transform | tuple[str, Sequence[int]] | str
) -> DenseMatrix:
    """Apply a transpose, row/column permutation, or row/column sign change."""
    if isinstance(op, str):
        op = Transform(op)
    elif not isinstance(op, Transform):
        op = Transform(op[0], tuple(op[1]))
    a = as_matrix(A, "A")
    m, n = a.shape
    if op.kind == "transpose":
        return a.T.copy()
    size = m if op.kind.startswith("row") else n
    if len(op.data) != size:
        raise InvalidInputError(f"{op.kind} needs {size} entries (got {len(op.data)})")
    if op.kind.endswith("perm"):
        if sorted(op.data) != list(range(size)):
            raise InvalidInputError(f"{op.kind} data is not a permutation of 0..{size - 1}")
        idx = list(op.data)
        return a[idx, :].copy() if op.kind == "row-perm" else a[:, idx].copy()
    if any(s not in (1, -1) for s in op.data):
        raise InvalidInputError(f"{op.kind} entries must be +1 or -1")
    signs = np.array(op.data, dtype=np.float64)
    return a * signs[:, None] if op.kind == "row-signs" else a * signs[None, :]


def compose_transforms(A: object, ops: Iterable[Transform]) -> DenseMatrix:
    out = as_matrix(A, "A")
    for op in ops:
        out = equivalence_transform(out, op)
    return out


# ---------------------------------------------------------------------------
# Rule chain
# ---------------------------------------------------------------------------


def classify_ssvp(A: object) -> ClosedFormVerdict:
    """
    Decide the SSVP by closed-form rules when one applies.

    Tall matrices are transposed first. Rules are tried in the order
    R2, R7, R1, R3, R4, R5, R6, R8; the verifier remains the ground truth
    when none matches.
    """
    a = as_matrix(A, "A")
    if a.size == 0:
        raise InvalidInputError("classify_ssvp needs a nonempty matrix")
    transposed = a.shape[0] > a.shape[1]
    result = _classify_wide(a.T if transposed else a)
    if transposed and result.certificate is not None:
        result = ClosedFormVerdict(
            result.verdict, result.rule, result.detail, result.certificate.T.copy()
        )
    logger.debug("[classify] %s via %s: %s", result.verdict, result.rule, result.detail)
    return result


def _has(rule: str, detail: str) -> ClosedFormVerdict:
    return ClosedFormVerdict(HAS_SSVP, rule, detail)


def _lacks(rule: str, detail: str, certificate: DenseMatrix | None) -> ClosedFormVerdict:
    return ClosedFormVerdict(LACKS_SSVP, rule, detail, certificate)


def _classify_wide(w: DenseMatrix) -> ClosedFormVerdict:
    m, n = w.shape
    P = pattern_of(w)
    mask = P.mask()

    # R2
    zero_rows = np.flatnonzero(~mask.any(axis=1))
    if zero_rows.size:
        i = int(zero_rows[0])
        X = np.zeros_like(w)
        X[i, :] = nullspace(w)[:, 0]
        return _lacks("R2", f"row {i + 1} is zero and m <= n", X)
    zero_cols = np.flatnonzero(~mask.any(axis=0))
    if m == n and zero_cols.size:
        j = int(zero_cols[0])
        X = np.zeros_like(w)
        X[:, j] = nullspace(w.T)[:, 0]
        return _lacks("R2", f"column {j + 1} of a square matrix is zero", X)

    # R7
    t = term_rank(P)
    if t < m:
        return _lacks("R7", f"term rank {t} < {m}", _term_rank_certificate(w, P))

    if mask.all():
        return _has("R1", "nowhere-zero")
    if m == 1:
        return _has("R3", "nonzero row vector")

    if m == n and not (mask & ~np.eye(n, dtype=bool)).any():
        return _diagonal_rule(np.diag(w))

    if zero_cols.size:
        return _bordered_rule(w, zero_cols)

    if m == 2:
        return _two_row_rule(w, mask)

    return _direct_sum_rule(w, P)


def _term_rank_certificate(w: DenseMatrix, P: Pattern) -> DenseMatrix:
    found = konig_zero_block(P)
    assert found is not None
    rows, cols = found
    reached = [j for j in range(w.shape[1]) if j not in cols]
    others = [i for i in range(w.shape[0]) if i not in rows]
    y = nullspace(w[np.ix_(rows, reached)].T)[:, 0]
    x = nullspace(w[np.ix_(others, cols)])[:, 0]
    X = np.zeros_like(w)
    X[np.ix_(rows, cols)] = np.outer(y, x)
    return X


def _diagonal_rule(d: np.ndarray) -> ClosedFormVerdict:
    mags = np.abs(d)
    tol = SIGMA_GAP_TOL * float(mags.max())
    for i in range(d.size):
        for j in range(i + 1, d.size):
            if abs(mags[i] - mags[j]) <= tol:
                X = np.zeros((d.size, d.size))
                X[i, j] = 1.0
                X[j, i] = d[i] / d[j]
                return _lacks("R4", f"|d_{i + 1}| = |d_{j + 1}|", X)
    return _has("R4", "diagonal entries have distinct nonzero absolute values")


def _bordered_rule(w: DenseMatrix, zero_cols: np.ndarray) -> ClosedFormVerdict:
    keep = [j for j in range(w.shape[1]) if j not in set(zero_cols.tolist())]
    B = w[:, keep]
    if rank(B) < B.shape[0]:
        X = np.zeros_like(w)
        X[:, int(zero_cols[0])] = nullspace(B.T)[:, 0]
        return _lacks("R5", "bordered [B | O] with dependent rows of B", X)
    inner = _classify_wide(B)
    if inner.verdict == NO_RULE:
        return ClosedFormVerdict(NO_RULE, None, "bordered [B | O] but no rule decides B")
    detail = f"bordered [B | O], rows of B independent; B: {inner.detail} ({inner.rule})"
    if inner.verdict == HAS_SSVP:
        return _has("R5", detail)
    X = None
    if inner.certificate is not None:
        X = np.zeros_like(w)
        X[:, keep] = inner.certificate
    return _lacks("R5", detail, X)


def _two_row_rule(w: DenseMatrix, mask: np.ndarray) -> ClosedFormVerdict:
    both = np.flatnonzero(mask[0] & mask[1])
    if both.size:
        return _has("R6", f"2 x n with {both.size} nowhere-zero column(s)")
    top = np.flatnonzero(mask[0] & ~mask[1]).tolist()
    bottom = np.flatnonzero(mask[1] & ~mask[0]).tolist()
    order = top + bottom
    canonical = equivalence_transform(w, Transform("col-perm", tuple(order)))
    c = canonical[0, : len(top)]
    d = canonical[1, len(top) :]
    cc, dd = float(c @ c), float(d @ d)
    if abs(cc - dd) > SIGMA_GAP_TOL * max(cc, dd):
        return _has("R6", "2 x n direct sum with c^T c != d^T d")
    X_canonical = np.zeros_like(canonical)
    X_canonical[0, len(top) :] = d
    X_canonical[1, : len(top)] = c
    X = np.zeros_like(w)
    X[:, order] = X_canonical
    return _lacks("R6", "2 x n direct sum with c^T c = d^T d", X)


def _direct_sum_rule(w: DenseMatrix, P: Pattern) -> ClosedFormVerdict:
    components = list(nx.connected_components(P.bigraph()))
    if len(components) < 2:
        return ClosedFormVerdict(NO_RULE, None, "no closed-form rule applies")
    first = next(c for c in components if ("r", 0) in c)
    rows_a = sorted(v[1] for v in first if v[0] == "r")
    cols_a = sorted(v[1] for v in first if v[0] == "c")
    rows_b = [i for i in range(w.shape[0]) if i not in rows_a]
    cols_b = [j for j in range(w.shape[1]) if j not in cols_a]
    A = w[np.ix_(rows_a, cols_a)]
    B = w[np.ix_(rows_b, cols_b)]
    report = check_direct_sum_conditions(A, B)
    flags = f"(a)={report.a} (b)={report.b} (c)={report.c} (d)={report.d}"
    if report.verdict == HAS_SSVP:
        return _has("R8", f"direct sum, all conditions hold: {flags}")
    X = None
    if report.certificate is not None:
        X = np.zeros_like(w)
        X[np.ix_(rows_a + rows_b, cols_a + cols_b)] = report.certificate
    return _lacks("R8", f"direct sum condition fails: {flags}", X)


# ---------------------------------------------------------------------------
# Direct sums
# ---------------------------------------------------------------------------


def check_direct_sum_conditions(
    A: object, B: object, tol: float = SIGMA_GAP_TOL
) -> DirectSumReport:
    """
    The four conditions deciding the SSVP of A (+) B.

    (a) m <= n and p <= q; (b) A and B have the SSVP; (c) no common nonzero
    singular value; (d) both have independent rows, or one is square invertible.
    The pair is transposed first when the direct sum is tall.
    """
    a = as_matrix(A, "A")
    b = as_matrix(B, "B")
    if a.shape[0] + b.shape[0] > a.shape[1] + b.shape[1]:
        a, b = a.T.copy(), b.T.copy()
        report = check_direct_sum_conditions(a, b, tol)
        cert = None if report.certificate is None else report.certificate.T.copy()
        return report._replace(certificate=cert)

    m, n = a.shape
    p, q = b.shape
    cond_a = m <= n and p <= q
    cert_a = check_ssvp(a, "exact-when-rational")
    cert_b = check_ssvp(b, "exact-when-rational")
    cond_b = cert_a.has_ssvp and cert_b.has_ssvp

    common = _common_singular_value(a, b, tol)
    cond_c = common is None

    rank_a, rank_b = rank(a), rank(b)
    rows_a_free, rows_b_free = rank_a == m, rank_b == p
    a_invertible = m == n and rows_a_free
    b_invertible = p == q and rows_b_free
    cond_d = (rows_a_free and rows_b_free) or a_invertible or b_invertible

    verdict = HAS_SSVP if (cond_a and cond_b and cond_c and cond_d) else LACKS_SSVP
    certificate = None
    if verdict == LACKS_SSVP:
        if not cond_b:
            certificate = direct_sum(
                cert_a.Y if cert_a.Y is not None else np.zeros_like(a),
                cert_b.Y if cert_b.Y is not None else np.zeros_like(b),
            )
        elif not cond_c:
            certificate = _common_value_certificate(a, b, common)
        elif not cond_d:
            certificate = _dependent_rows_certificate(a, b)
    return DirectSumReport(cond_a, cond_b, cond_c, cond_d, verdict, certificate)


def _common_singular_value(a: DenseMatrix, b: DenseMatrix, tol: float) -> float | None:
    sa = singular_values(a).as_array()
    sb = singular_values(b).as_array()
    top = max(float(sa[0]), float(sb[0]))
    if top == 0.0:
        return None
    sa = sa[sa > 1e-12 * top]
    sb = sb[sb > 1e-12 * top]
    for x in sa:
        for y in sb:
            if abs(x - y) <= tol * top:
                return float(x)
    return None


def _singular_pair(M: DenseMatrix, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    u, s, vh = scipy.linalg.svd(M)
    k = int(np.argmin(np.abs(s - sigma)))
    return u[:, k], vh[k]


def _common_value_certificate(a: DenseMatrix, b: DenseMatrix, sigma: float | None) -> DenseMatrix:
    assert sigma is not None
    ua, va = _singular_pair(a, sigma)
    ub, vb = _singular_pair(b, sigma)
    m, n = a.shape
    p, q = b.shape
    X = np.zeros((m + p, n + q))
    X[:m, n:] = np.outer(ua, vb)
    X[m:, :n] = np.outer(ub, va)
    return X


def _dependent_rows_certificate(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix | None:
    m, n = a.shape
    p, q = b.shape
    X = np.zeros((m + p, n + q))
    left, right = nullspace(a.T), nullspace(b)
    if left.shape[1] and right.shape[1]:
        X[:m, n:] = np.outer(left[:, 0], right[:, 0])
        return X
    left, right = nullspace(b.T), nullspace(a)
    if left.shape[1] and right.shape[1]:
        X[m:, :n] = np.outer(left[:, 0], right[:, 0])
        return X
    return None


# ---------------------------------------------------------------------------
# Pattern-level facts
# ---------------------------------------------------------------------------


def allows_all_nonzero_lists(P: Pattern) -> bool:
    """True iff P is [J | O] up to column permutation, J having at least m columns."""
    if P.rows > P.cols:
        raise InvalidInputError("allows_all_nonzero_lists expects m <= n")
    arr = P.to_array()
    nonzero_cols = arr[:, arr.any(axis=0)]
    if nonzero_cols.shape[1] < P.rows or not nonzero_cols.all():
        return False
    return term_rank(P) == P.rows


def zero_pattern_only(P: Pattern) -> bool:
    """True iff every matrix with pattern P has all singular values 0, i.e. P = O."""
    return not any(P.cells)
