"""
Dense linear-algebra kernels shared by every other module.

Floating-point work goes through numpy/scipy; exact work goes through
``fractions.Fraction`` with fraction-free (Bareiss) elimination on integer rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np
import scipy.linalg

from ssvpkit.errors import (
    DegenerateSpectrumError,
    InvalidInputError,
    NumericalBreakdownError,
)

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-12
RATIONAL_MAX_DENOMINATOR = 1000

DenseMatrix = np.ndarray


def as_matrix(value: object, name: str = "matrix") -> DenseMatrix:
    """Coerce ``value`` to a finite, C-contiguous float64 2-D array."""
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} is not a real matrix: {exc}") from exc
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional (got {arr.ndim} dimensions)")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return np.ascontiguousarray(arr)


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaList:
    """A non-increasing list of nonnegative singular values."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise InvalidInputError(f"singular values must be finite and nonnegative: {vals}")
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise InvalidInputError(f"singular values must be non-increasing: {vals}")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> SigmaList:
        """Build a list from values in any order."""
        return cls(tuple(sorted((float(v) for v in values), reverse=True)))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __getitem__(self, index: int) -> float:
        return self.values[index]

    def __repr__(self) -> str:
        return "SigmaList(" + ", ".join(f"{v:.6g}" for v in self.values) + ")"

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)

    def multiplicities(self, tol: float = 1e-9) -> tuple[int, ...]:
        """Multiplicities of the distinct values, largest value first."""
        if not self.values:
            return ()
        scale = max(self.values[0], 1e-300)
        counts = [1]
        for prev, cur in zip(self.values, self.values[1:]):
            if prev - cur <= tol * scale:
                counts[-1] += 1
            else:
                counts.append(1)
        return tuple(counts)

    def close_to(self, other: Sequence[float], tol: float = 1e-8) -> bool:
        """True when every value agrees with ``other`` within ``tol`` relative to sigma_1."""
        other_vals = tuple(other)
        if len(other_vals) != len(self.values):
            return False
        scale = max(self.values[0] if self.values else 0.0, 1e-300)
        return all(abs(a - b) <= tol * scale for a, b in zip(self.values, other_vals))


@dataclass(frozen=True)
class RationalMatrix:
    """A matrix of exact rationals, stored row-major."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise InvalidInputError("RationalMatrix dimensions must be nonnegative")
        entries = tuple(Fraction(e) for e in self.entries)
        if len(entries) != self.rows * self.cols:
            raise InvalidInputError(
                f"RationalMatrix needs {self.rows * self.cols} entries (got {len(entries)})"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]]) -> RationalMatrix:
        rows = [list(r) for r in rows]
        cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise InvalidInputError("RationalMatrix rows must have equal length")
        return cls(len(rows), cols, tuple(Fraction(e) for r in rows for e in r))

    @classmethod
    def from_dense(
        cls, M: object, max_denominator: int = RATIONAL_MAX_DENOMINATOR
    ) -> RationalMatrix:
        """Convert a float matrix whose entries are small-denominator rationals."""
        arr = as_matrix(M)
        entries = []
        for x in arr.flat:
            frac = Fraction(float(x)).limit_denominator(max_denominator)
            if float(frac) != float(x):
                raise InvalidInputError(f"entry {x!r} is not a rational with small denominator")
            entries.append(frac)
        return cls(arr.shape[0], arr.shape[1], tuple(entries))

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> RationalMatrix:
        return RationalMatrix(
            self.cols,
            self.rows,
            tuple(
                self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)
            ),
        )

    def to_dense(self) -> DenseMatrix:
        return np.array([float(e) for e in self.entries], dtype=np.float64).reshape(
            self.rows, self.cols
        )


def is_rational(M: object, max_denominator: int = RATIONAL_MAX_DENOMINATOR) -> bool:
    """True when every entry round-trips through a small-denominator fraction."""
    arr = as_matrix(M)
    return all(
        float(Fraction(float(x)).limit_denominator(max_denominator)) == float(x) for x in arr.flat
    )


# ---------------------------------------------------------------------------
# Floating-point kernels
# ---------------------------------------------------------------------------


def singular_values(M: object) -> SigmaList:
    """Return the min(m, n) singular values of ``M``, largest first."""
    arr = as_matrix(M)
    if arr.size == 0:
        raise InvalidInputError("singular_values needs a nonempty matrix")
    s = scipy.linalg.svdvals(arr)
    return SigmaList(tuple(np.maximum(np.sort(s)[::-1], 0.0)))


def _rank_threshold(s: np.ndarray, shape: tuple[int, int], tol: float) -> float:
    smax = float(s[0]) if s.size else 0.0
    return tol * max(shape) * smax


def rank(M: object, tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank: singular values above ``tol * max(m, n) * sigma_max``."""
    arr = as_matrix(M)
    if arr.size == 0:
        return 0
    s = scipy.linalg.svdvals(arr)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > _rank_threshold(s, arr.shape, tol)))


def nullspace(M: object, tol: float = DEFAULT_RANK_TOL) -> DenseMatrix:
    """
    Orthonormal basis (as columns) of the numerical nullspace of ``M``.

    A direction x is kept when ||Mx|| <= tol * ||M||_2 * ||x||. Each basis vector is
    signed so that its first entry of magnitude above ``tol`` is positive.
    """
    if tol < 0:
        raise InvalidInputError("tol must be nonnegative")
    arr = as_matrix(M)
    n = arr.shape[1]
    if arr.shape[0] == 0 or n == 0 or not np.any(arr):
        return np.eye(n)
    _, s, vh = scipy.linalg.svd(arr, full_matrices=True)
    keep = np.ones(n, dtype=bool)
    keep[: s.size] = s <= tol * s[0]
    basis = vh[keep].T.copy()
    for k in range(basis.shape[1]):
        col = basis[:, k]
        big = np.flatnonzero(np.abs(col) > tol)
        if big.size and col[big[0]] < 0:
            basis[:, k] = -col
    return basis


def numeric_pivot_rows(M: object, tol: float = DEFAULT_RANK_TOL) -> list[int]:
    """Greedy scan: keep each row that raises the numerical rank of the rows kept so far."""
    arr = as_matrix(M)
    if arr.size == 0:
        return []
    s = scipy.linalg.svdvals(arr)
    threshold = _rank_threshold(s, arr.shape, tol)
    basis = np.zeros((0, arr.shape[1]))
    picked: list[int] = []
    for i, row in enumerate(arr):
        resid = row - basis.T @ (basis @ row)
        resid = resid - basis.T @ (basis @ resid)
        norm = float(np.linalg.norm(resid))
        if norm > threshold and norm > 0.0:
            basis = np.vstack([basis, resid / norm])
            picked.append(i)
    return picked


def expm_skew(K: object) -> DenseMatrix:
    """
    Matrix exponential of a skew-symmetric matrix.

    Uses scipy's scaling-and-squaring with a Pade approximant whose degree
    (3, 5, 7, 9 or 13) is picked from the 1-norm bound.
    """
    arr = as_matrix(K, "K")
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"K must be square (got {arr.shape})")
    norm = float(np.linalg.norm(arr))
    if float(np.linalg.norm(arr + arr.T)) > 1e-12 * norm:
        raise InvalidInputError("K is not skew-symmetric")
    skew = 0.5 * (arr - arr.T)
    return np.ascontiguousarray(scipy.linalg.expm(skew))


def lanczos_jacobi(
    eigenvalues: Sequence[float], start: Sequence[float] | None = None
) -> DenseMatrix:
    """
    Jacobi matrix with prescribed distinct eigenvalues.

    Runs Lanczos with full reorthogonalization on diag(eigenvalues) from ``start``
    (uniform by default). Off-diagonal entries come out positive.

    Raises:
        DegenerateSpectrumError: two eigenvalues coincide.
        NumericalBreakdownError: an off-diagonal falls below 1e-12 * spread.
    """
    lam = np.asarray([float(v) for v in eigenvalues], dtype=np.float64)
    n = lam.size
    if n == 0:
        raise InvalidInputError("lanczos_jacobi needs at least one eigenvalue")
    if not np.all(np.isfinite(lam)):
        raise InvalidInputError("eigenvalues must be finite")
    ordered = np.sort(lam)
    scale = max(1.0, float(np.max(np.abs(lam))))
    if n > 1 and float(np.min(np.diff(ordered))) <= 1e-12 * scale:
        raise DegenerateSpectrumError(f"eigenvalues must be distinct: {tuple(lam)}")

    q = np.full(n, 1.0 / math.sqrt(n)) if start is None else np.asarray(start, dtype=np.float64)
    if q.shape != (n,):
        raise InvalidInputError(f"start vector must have length {n}")
    if not np.all(q != 0.0):
        raise InvalidInputError("start vector must be nowhere zero")
    q = q / np.linalg.norm(q)

    spread = float(ordered[-1] - ordered[0])
    basis = np.zeros((n, n))
    alpha = np.zeros(n)
    beta = np.zeros(max(n - 1, 0))
    for k in range(n):
        basis[:, k] = q
        w = lam * q
        alpha[k] = q @ w
        w = w - alpha[k] * q
        if k > 0:
            w = w - beta[k - 1] * basis[:, k - 1]
        for _ in range(2):
            w = w - basis[:, : k + 1] @ (basis[:, : k + 1].T @ w)
        if k < n - 1:
            b = float(np.linalg.norm(w))
            if b <= 1e-12 * spread:
                raise NumericalBreakdownError(f"Lanczos breakdown at step {k + 1} (beta={b:.3e})")
            beta[k] = b
            q = w / b
    return np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)


def sylvester_commuting_dim(Asym: object, Bsym: object, tol: float = 1e-9) -> int:
    """Dimension of {X : AX = XB} for symmetric A, B."""
    a = as_matrix(Asym, "Asym")
    b = as_matrix(Bsym, "Bsym")
    for name, arr in (("Asym", a), ("Bsym", b)):
        if arr.shape[0] != arr.shape[1] or not np.allclose(arr, arr.T, rtol=0, atol=1e-12):
            raise InvalidInputError(f"{name} must be symmetric")
    lam = scipy.linalg.eigvalsh(a)
    mu = scipy.linalg.eigvalsh(b)
    return int(np.count_nonzero(np.abs(lam[:, None] - mu[None, :]) <= tol))


def fd_jacobian(
    f: Callable[[np.ndarray], np.ndarray], x: Sequence[float], h: float = 1e-6
) -> DenseMatrix:
    """Central-difference Jacobian of ``f`` at ``x``."""
    if not h > 0:
        raise InvalidInputError("h must be positive")
    x0 = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.atleast_1d(np.asarray(f(x0), dtype=np.float64))
    jac = np.empty((out.size, x0.size))
    for j in range(x0.size):
        step = np.zeros_like(x0)
        step[j] = h
        plus = np.atleast_1d(np.asarray(f(x0 + step), dtype=np.float64))
        minus = np.atleast_1d(np.asarray(f(x0 - step), dtype=np.float64))
        jac[:, j] = (plus - minus).ravel() / (2.0 * h)
    return jac


def lower_positions(size: int) -> list[tuple[int, int]]:
    """Below-diagonal positions (i, j), i > j, in column-major order."""
    return [(i, j) for j in range(size) for i in range(j + 1, size)]


def skew_from_lower(coords: Sequence[float], size: int) -> DenseMatrix:
    """Skew-symmetric matrix whose below-diagonal entries are ``coords``."""
    positions = lower_positions(size)
    if len(coords) != len(positions):
        raise InvalidInputError(
            f"need {len(positions)} coordinates for a {size}x{size} skew matrix"
        )
    out = np.zeros((size, size))
    for (i, j), c in zip(positions, coords):
        out[i, j] = c
        out[j, i] = -c
    return out


def direct_sum(A: object, B: object) -> DenseMatrix:
    """Block-diagonal matrix [[A, O], [O, B]]."""
    a = as_matrix(A, "A")
    b = as_matrix(B, "B")
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


# ---------------------------------------------------------------------------
# Exact kernels
# ---------------------------------------------------------------------------


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        scale = math.lcm(*(Fraction(x).denominator for x in row)) if row else 1
        out.append([int(Fraction(x) * scale) for x in row])
    return out


def _bareiss_pivots(rows: list[list[int]]) -> list[int]:
    """Pivot columns of the fraction-free echelon form of an integer matrix."""
    a = [list(r) for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    prev = 1
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        for i in range(r + 1, m):
            lead = a[i][c]
            for j in range(c + 1, n):
                a[i][j] = (piv * a[i][j] - lead * a[r][j]) // prev
            a[i][c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def exact_rank(M: RationalMatrix) -> int:
    """Exact rank by fraction-free elimination."""
    if M.rows == 0 or M.cols == 0:
        return 0
    return len(_bareiss_pivots(_integer_rows(M.to_rows())))


def exact_pivot_rows(M: RationalMatrix) -> list[int]:
    """Rows kept by a greedy left-to-right independence scan, computed exactly."""
    if M.rows == 0 or M.cols == 0:
        return []
    return _bareiss_pivots(_integer_rows(M.transpose().to_rows()))


def _primitive(vec: Sequence[Fraction]) -> list[int]:
    scale = math.lcm(*(x.denominator for x in vec))
    ints = [int(x * scale) for x in vec]
    g = math.gcd(*ints)
    ints = [v // g for v in ints] if g else ints
    lead = next((v for v in ints if v != 0), 0)
    return [-v for v in ints] if lead < 0 else ints


def exact_nullspace(M: RationalMatrix) -> list[list[int]]:
    """Nullspace basis from the reduced row echelon form, as primitive integer vectors."""
    n = M.cols
    a = M.to_rows()
    pivots: list[int] = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                a[i] = [x - factor * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        vec = [Fraction(0)] * n
        vec[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -a[i][free]
        basis.append(_primitive(vec))
    return basis
