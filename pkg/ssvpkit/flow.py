"""
Continuation engine: superpattern, bifurcation and liberation solves.

Every solve moves a matrix along its orbit A -> Q A R (Q, R orthogonal), so the
singular values are carried structurally. The orthogonal factors are updated
multiplicatively, Q <- exp(K) Q and R <- R exp(L), with K and L skew-symmetric and
parametrized by their below-diagonal coordinates. Steps come from a damped
Gauss-Newton (Levenberg-Marquardt) iteration on the equations of each problem.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from ssvpkit.config import SolverConfig
from ssvpkit.errors import (
    AmbiguousPatternError,
    BorderlineRankError,
    InfeasibleError,
    InvalidInputError,
    NoConvergenceError,
    NotASuperpatternError,
    NotInTangentSpaceError,
    SsvpRequiredError,
    TargetTooFarError,
)
from ssvpkit.numerics import (
    DEFAULT_RANK_TOL,
    DenseMatrix,
    SigmaList,
    as_matrix,
    expm_skew,
    lower_positions,
    nullspace,
    rank,
    singular_values,
    skew_from_lower,
)
from ssvpkit.pattern import Pattern, is_superpattern, pattern_of
from ssvpkit.types import RealizationResult, build_result
from ssvpkit.verify import check_ssvp, check_ssvp_wrt

logger = logging.getLogger(__name__)

TraceCallback = Callable[[dict[str, float]], None]

TANGENT_RESIDUAL_TOL = 1e-10
DIRECTION_SPREAD_TOL = 1e-8
DIRECTION_SAMPLES = 32
DAMPING_FLOOR = 1e-15
DAMPING_CEILING = 1e12
NEW_ENTRY_WEIGHT = 1e-2


# ---------------------------------------------------------------------------
# Tangent space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TangentSpace:
    """Orthonormal basis of {K A + A L : K skew m x m, L skew n x n}."""

    basis: tuple[DenseMatrix, ...]
    dimension: int

    def contains(self, D: object, tol: float = TANGENT_RESIDUAL_TOL) -> bool:
        d = as_matrix(D, "D")
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            return True
        if not self.basis:
            return False
        if self.basis[0].shape != d.shape:
            raise InvalidInputError(f"D has shape {d.shape}, expected {self.basis[0].shape}")
        flat = np.stack([b.ravel() for b in self.basis], axis=1)
        resid = d.ravel() - flat @ (flat.T @ d.ravel())
        return float(np.linalg.norm(resid)) <= tol * norm


def _generator_matrix(a: DenseMatrix) -> DenseMatrix:
    """
    Columns vec(G A) for the skew generators G of Skew(m), then vec(A G) for Skew(n).

    Generators follow ``skew_from_lower``: coordinate (i, j), i > j, is E_ij - E_ji.
    Vectors are row-major ravels.
    """
    m, n = a.shape
    cols: list[np.ndarray] = []
    for i, j in lower_positions(m):
        ga = np.zeros_like(a)
        ga[i, :] = a[j, :]
        ga[j, :] = -a[i, :]
        cols.append(ga.ravel())
    for i, j in lower_positions(n):
        ag = np.zeros_like(a)
        ag[:, j] = a[:, i]
        ag[:, i] = -a[:, j]
        cols.append(ag.ravel())
    if not cols:
        return np.zeros((m * n, 0))
    return np.stack(cols, axis=1)


def _coordinate_columns(shape: tuple[int, int], positions: list[tuple[int, int]]) -> DenseMatrix:
    m, n = shape
    out = np.zeros((m * n, len(positions)))
    for k, (p, q) in enumerate(positions):
        out[p * n + q, k] = 1.0
    return out


def tangent_basis(A: object, tol: float = DEFAULT_RANK_TOL) -> TangentSpace:
    """
    Basis of the tangent space of the singular-value orbit at A.

    The dimension is the numerical rank of the generator matrix; the basis matrices
    are its leading left singular vectors reshaped to m x n.
    """
    a = as_matrix(A, "A")
    gen = _generator_matrix(a)
    if gen.shape[1] == 0 or not np.any(gen):
        return TangentSpace((), 0)
    r = rank(gen, tol)
    u, _, _ = scipy.linalg.svd(gen, full_matrices=False)
    basis = tuple(np.ascontiguousarray(u[:, k].reshape(a.shape)) for k in range(r))
    return TangentSpace(basis, r)


def orbit_jacobian(A: object, support: Pattern | None = None) -> DenseMatrix:
    """
    Jacobian of (K, L, B) -> exp(K) A exp(L) + B at the identity.

    Columns are the skew coordinates of K, then those of L, then the entries of B
    at the ones of ``support`` (the pattern of A by default), in row-major order.
    """
    a = as_matrix(A, "A")
    supp = pattern_of(a) if support is None else support
    if supp.shape != a.shape:
        raise InvalidInputError("support shape does not match A")
    return np.hstack([_generator_matrix(a), _coordinate_columns(a.shape, supp.ones())])


def ssvp_via_tangent(A: object) -> bool:
    """True iff the tangent space plus the coordinate matrices at nonzeros of A span R^{m x n}."""
    a = as_matrix(A, "A")
    m, n = a.shape
    return rank(orbit_jacobian(a)) == m * n


# ---------------------------------------------------------------------------
# Levenberg-Marquardt on the orbit
# ---------------------------------------------------------------------------


@dataclass
class _OrbitProblem:
    """
    Equations (Q (core) R [+ B])[rows] = target[rows].

    With ``inner`` the free entries are added to ``base`` before the orthogonal
    factors act; otherwise they are added afterwards.
    ``weights`` rescale the free coordinates; a small weight makes the damped
    minimum-norm step lean on the orthogonal factors for that entry.
    """

    base: DenseMatrix
    target: DenseMatrix
    free: list[tuple[int, int]]
    inner: bool = False
    rows: np.ndarray | None = None
    weights: np.ndarray | None = None
    left: DenseMatrix = field(init=False)
    right: DenseMatrix = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        m, n = self.base.shape
        self.left = np.eye(m)
        self.right = np.eye(n)
        self.b = np.zeros(len(self.free))
        self._mk = len(lower_positions(m))
        self._nl = len(lower_positions(n))

    @property
    def unknowns(self) -> int:
        return self._mk + self._nl + len(self.free)

    def free_matrix(self, b: np.ndarray) -> DenseMatrix:
        out = np.zeros_like(self.base)
        for (p, q), v in zip(self.free, b):
            out[p, q] = v
        return out

    def evaluate(
        self, left: DenseMatrix, right: DenseMatrix, b: np.ndarray
    ) -> tuple[DenseMatrix, DenseMatrix]:
        """Return (orbit product, full value) at the given state."""
        bmat = self.free_matrix(b)
        if self.inner:
            product = left @ (self.base + bmat) @ right
            return product, product
        product = left @ self.base @ right
        return product, product + bmat

    def residual(self, value: DenseMatrix) -> np.ndarray:
        diff = (value - self.target).ravel()
        return diff if self.rows is None else diff[self.rows]

    def jacobian(self, product: DenseMatrix) -> DenseMatrix:
        m, n = product.shape
        cols = [_generator_matrix(product)]
        if self.free:
            if self.inner:
                cols.append(
                    np.stack(
                        [np.outer(self.left[:, p], self.right[q, :]).ravel() for p, q in self.free],
                        axis=1,
                    )
                )
            else:
                coords = _coordinate_columns((m, n), self.free)
                cols.append(coords if self.weights is None else coords * self.weights)
        jac = np.hstack(cols)
        return jac if self.rows is None else jac[self.rows]

    def step(self, delta: np.ndarray) -> tuple[DenseMatrix, DenseMatrix, np.ndarray]:
        m, n = self.base.shape
        k = skew_from_lower(delta[: self._mk], m)
        l_ = skew_from_lower(delta[self._mk : self._mk + self._nl], n)
        left = expm_skew(k) @ self.left
        right = self.right @ expm_skew(l_)
        db = delta[self._mk + self._nl :]
        return left, right, self.b + (db if self.weights is None else self.weights * db)

    def factor_defect(self) -> float:
        m, n = self.base.shape
        return max(
            float(np.linalg.norm(self.left.T @ self.left - np.eye(m))),
            float(np.linalg.norm(self.right.T @ self.right - np.eye(n))),
        )


@dataclass(frozen=True)
class _OrbitSolution:
    product: DenseMatrix
    value: DenseMatrix
    residual: float
    iterations: int
    factor_defect: float


def _levenberg_marquardt(
    problem: _OrbitProblem,
    cfg: SolverConfig,
    tol: float,
    label: str,
    trace: TraceCallback | None = None,
) -> _OrbitSolution:
    """
    Drive the residual of ``problem`` below ``tol``.

    Each step solves [J; sqrt(lambda) s I] delta = [-r; 0] by least squares, which
    gives a near minimum-norm step on underdetermined systems. Lambda is divided
    by 10 on accepted steps and multiplied by 10 on rejected ones.

    Raises:
        NoConvergenceError: iterations run out or the damping blows up.
    """
    product, value = problem.evaluate(problem.left, problem.right, problem.b)
    r = problem.residual(value)
    res = float(np.linalg.norm(r))
    damping = cfg.damping
    iterations = 0
    logger.debug("[flow] %s start residual=%.3e unknowns=%d", label, res, problem.unknowns)
    while res > tol:
        if iterations >= cfg.max_iters:
            raise NoConvergenceError(
                f"{label} did not converge", best_residual=res, iterations=iterations
            )
        if damping > DAMPING_CEILING or problem.unknowns == 0:
            raise NoConvergenceError(
                f"{label} stalled (damping {damping:.1e})", best_residual=res, iterations=iterations
            )
        iterations += 1
        jac = problem.jacobian(product)
        scale = max(1.0, float(np.linalg.norm(jac)))
        lhs = np.vstack([jac, np.sqrt(damping) * scale * np.eye(jac.shape[1])])
        rhs = np.concatenate([-r, np.zeros(jac.shape[1])])
        delta = scipy.linalg.lstsq(lhs, rhs)[0]
        left, right, b = problem.step(delta)
        new_product, new_value = problem.evaluate(left, right, b)
        new_r = problem.residual(new_value)
        new_res = float(np.linalg.norm(new_r))
        step_norm = float(np.linalg.norm(delta))
        if new_res < res:
            problem.left, problem.right, problem.b = left, right, b
            product, value, r, res = new_product, new_value, new_r, new_res
            damping = max(damping / 10.0, DAMPING_FLOOR)
            logger.debug(
                "[flow] %s iter=%d residual=%.3e damping=%.1e step=%.3e",
                label, iterations, res, damping, step_norm,
            )
            if trace is not None:
                trace(
                    {
                        "iter": iterations,
                        "residual": res,
                        "damping": damping,
                        "step_norm": step_norm,
                    }
                )
        else:
            damping *= 10.0
    return _OrbitSolution(product, value, res, iterations, problem.factor_defect())


def _tolerance(a: DenseMatrix, cfg: SolverConfig) -> float:
    return cfg.residual_tol * max(1.0, float(np.linalg.norm(a)))


def _require_ssvp(a: DenseMatrix, action: str) -> None:
    try:
        cert = check_ssvp(a, mode="exact-when-rational")
    except BorderlineRankError as exc:
        raise SsvpRequiredError(
            f"{action} needs the SSVP, which is borderline here: {exc}"
        ) from exc
    if not cert.has_ssvp:
        raise SsvpRequiredError(f"{action} needs a matrix with the SSVP", cert)


def _ssvp_verdict(x: DenseMatrix) -> bool | None:
    try:
        return check_ssvp(x).has_ssvp
    except (BorderlineRankError, AmbiguousPatternError):
        return None


def _smallest_positive(sigmas: SigmaList) -> float:
    vals = sigmas.as_array()
    positive = vals[vals > DEFAULT_RANK_TOL * max(float(vals[0]), 1e-300)]
    return float(positive[-1]) if positive.size else 1.0


# ---------------------------------------------------------------------------
# Superpattern
# ---------------------------------------------------------------------------


def superpattern_realize(
    A: object,
    P: Pattern,
    cfg: SolverConfig | None = None,
    trace: TraceCallback | None = None,
) -> RealizationResult:
    """
    Find a matrix with pattern P and the singular values of A.

    Solves Q A R + B = A_hat, B supported on P, where A_hat seeds each new position
    of P with epsilon * (smallest positive singular value). The coordinates of B on
    the new positions carry ``NEW_ENTRY_WEIGHT``. The output is A_hat - B = Q A R,
    whose entries off P are within the residual tolerance and are set to zero. On a
    pattern failure epsilon is halved, up to ``cfg.max_retries`` times.

    Raises:
        NotASuperpatternError: P does not contain the pattern of A.
        SsvpRequiredError: A lacks the SSVP.
        AmbiguousPatternError: every retry left an entry on P too small to call.
        NoConvergenceError: every retry failed to converge.
    """
    cfg = cfg or SolverConfig()
    a = as_matrix(A, "A")
    base = pattern_of(a)
    if P.shape != a.shape or not is_superpattern(P, base):
        raise NotASuperpatternError("P must be a superpattern of the pattern of A")
    sigmas = singular_values(a)
    if P == base:
        return build_result(a, sigmas, "superpattern", P, ssvp=None)
    _require_ssvp(a, "superpattern_realize")

    new = P.mask() & ~base.mask()
    seed = _smallest_positive(sigmas)
    eps = cfg.epsilon_seed
    tol = _tolerance(a, cfg)
    last: Exception | None = None
    logger.info("[flow] superpattern start shape=%s new_entries=%d", a.shape, int(new.sum()))
    for attempt in range(cfg.max_retries + 1):
        target = a + eps * seed * new
        problem = _superpattern_problem(a, P, target)
        try:
            sol = _levenberg_marquardt(problem, cfg, tol, "superpattern", trace)
        except NoConvergenceError as exc:
            last = exc
        else:
            x = np.where(P.mask(), sol.product, 0.0)
            mismatch = _pattern_mismatch(x, P)
            if not mismatch:
                logger.info(
                    "[flow] superpattern converged iters=%d residual=%.3e",
                    sol.iterations,
                    sol.residual,
                )
                return build_result(
                    x,
                    sigmas,
                    "superpattern",
                    P,
                    iterations=sol.iterations,
                    residual=sol.residual,
                    factor_defect=sol.factor_defect,
                )
            last = AmbiguousPatternError(mismatch)
        eps /= 2.0
        logger.warning(
            "[flow] superpattern retry %d with epsilon=%.3g (%s)", attempt + 1, eps, last
        )
    assert last is not None
    raise last


def _superpattern_problem(a: DenseMatrix, P: Pattern, target: DenseMatrix) -> _OrbitProblem:
    """Q A R + B = target with B free on every position of P."""
    base = pattern_of(a)
    free = P.ones()
    weights = np.array([1.0 if base[i, j] else NEW_ENTRY_WEIGHT for i, j in free])
    return _OrbitProblem(a, target, free, weights=weights)


def _pattern_mismatch(x: DenseMatrix, P: Pattern) -> list[tuple[int, int]]:
    """Positions where x fails to have pattern P (empty when it matches)."""
    try:
        got = pattern_of(x)
    except AmbiguousPatternError as exc:
        return list(exc.positions)
    return [(i, j) for i, j in P.ones() if not got[i, j]] + [
        (i, j) for i, j in P.zeros() if got[i, j]
    ]


# ---------------------------------------------------------------------------
# Bifurcation
# ---------------------------------------------------------------------------


def bifurcate(
    A: object,
    target: SigmaList,
    cfg: SolverConfig | None = None,
    trace: TraceCallback | None = None,
) -> RealizationResult:
    """
    Move the singular values of A to ``target`` while keeping its pattern.

    With M = U diag(target) V^T from the SVD of A, solves Q (A + B) R = M for B on the
    pattern of A and returns A + B. Targets farther than ``cfg.locality * sigma_1``
    are reached through ``cfg.homotopy_stages`` interpolated lists, re-checking the
    SSVP at every stage.

    Raises:
        SsvpRequiredError: A lacks the SSVP.
        TargetTooFarError: the staged path broke down.
    """
    cfg = cfg or SolverConfig()
    a = as_matrix(A, "A")
    if not isinstance(target, SigmaList):
        target = SigmaList.from_values(target)
    current = singular_values(a)
    if len(target) != len(current):
        raise InvalidInputError(f"target needs {len(current)} values (got {len(target)})")
    base = pattern_of(a)
    _require_ssvp(a, "bifurcate")
    if current.close_to(target, tol=cfg.residual_tol):
        return build_result(a, target, "bifurcate", base, ssvp=True)

    start = current.as_array()
    goal = target.as_array()
    distance = float(np.max(np.abs(goal - start)))
    reach = cfg.locality * float(start[0])
    if distance <= reach:
        try:
            return _bifurcate_path(a, base, start, goal, 1, cfg, trace, check_stages=False)
        except (NoConvergenceError, SsvpRequiredError) as exc:
            logger.warning("[flow] bifurcate direct solve failed (%s); staging", exc)
    else:
        logger.warning(
            "[flow] bifurcate target is %.3g away (reach %.3g); staging over %d lists",
            distance, reach, cfg.homotopy_stages,
        )
    try:
        return _bifurcate_path(
            a, base, start, goal, cfg.homotopy_stages, cfg, trace, check_stages=True
        )
    except (NoConvergenceError, SsvpRequiredError) as exc:
        best = exc.best_residual if isinstance(exc, NoConvergenceError) else float("inf")
        iters = exc.iterations if isinstance(exc, NoConvergenceError) else 0
        raise TargetTooFarError(
            f"bifurcate could not reach {target!r} from {current!r}",
            best_residual=best,
            iterations=iters,
        ) from exc


def _bifurcate_path(
    a: DenseMatrix,
    base: Pattern,
    start: np.ndarray,
    goal: np.ndarray,
    stages: int,
    cfg: SolverConfig,
    trace: TraceCallback | None,
    *,
    check_stages: bool,
) -> RealizationResult:
    m, n = a.shape
    x = a
    total_iters = 0
    sol: _OrbitSolution | None = None
    for stage in range(1, stages + 1):
        if check_stages and stage > 1:
            _require_ssvp(x, f"bifurcate stage {stage}")
        values = start + (stage / stages) * (goal - start)
        u, _, vt = scipy.linalg.svd(x, full_matrices=True)
        sigma = np.zeros((m, n))
        sigma[np.arange(values.size), np.arange(values.size)] = values
        problem = _OrbitProblem(x, u @ sigma @ vt, base.ones(), inner=True)
        label = f"bifurcate[{stage}/{stages}]"
        sol = _levenberg_marquardt(problem, cfg, _tolerance(x, cfg), label, trace)
        total_iters += sol.iterations
        x = x + problem.free_matrix(problem.b)
        mismatch = _pattern_mismatch(x, base)
        if mismatch:
            raise NoConvergenceError(
                f"bifurcate stage {stage} lost the pattern at {mismatch}",
                best_residual=sol.residual,
                iterations=total_iters,
            )
    assert sol is not None
    logger.info("[flow] bifurcate converged stages=%d iters=%d", stages, total_iters)
    return build_result(
        x,
        SigmaList(tuple(goal)),
        "bifurcate",
        base,
        iterations=total_iters,
        residual=sol.residual,
        factor_defect=sol.factor_defect,
        ssvp=_ssvp_verdict(x),
    )


# ---------------------------------------------------------------------------
# Liberation
# ---------------------------------------------------------------------------


def _tangent_coordinates(a: DenseMatrix, d: DenseMatrix) -> tuple[np.ndarray, float]:
    gen = _generator_matrix(a)
    if gen.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(d))
    coeffs = scipy.linalg.lstsq(gen, d.ravel())[0]
    return coeffs, float(np.linalg.norm(gen @ coeffs - d.ravel()))


def _direction_pattern(a: DenseMatrix, base: Pattern, d: DenseMatrix) -> Pattern:
    """Pattern of A in the direction of D: the pattern of A plus the nonzeros of D on its zeros."""
    off = np.where(base.mask(), 0.0, d)
    if not np.any(off):
        return base
    return base.union(pattern_of(off))


def liberation_direction(
    A: object, wanted: Pattern, cfg: SolverConfig | None = None
) -> DenseMatrix:
    """
    A tangent direction D = K A + A L that is nonzero on every wanted position.

    ``wanted`` marks zero positions of A. The first pass looks for D vanishing off
    the wanted positions; the second lets D also be nonzero on the support of A.
    In both passes D vanishes (up to ``TANGENT_RESIDUAL_TOL * ||D||``) on the other
    zeros of A. D is scaled so that its restriction to the wanted positions has unit
    norm, with the first wanted entry positive.

    Raises:
        InvalidInputError: a wanted position is not a zero of A.
        InfeasibleError: no tangent direction reaches every wanted position.
    """
    cfg = cfg or SolverConfig()
    a = as_matrix(A, "A")
    m, n = a.shape
    if wanted.shape != a.shape:
        raise InvalidInputError(f"wanted has shape {wanted.shape}, expected {a.shape}")
    base = pattern_of(a)
    targets = wanted.ones()
    if not targets:
        raise InvalidInputError("wanted marks no positions")
    if any(base[i, j] for i, j in targets):
        raise InvalidInputError("wanted positions must be zeros of A")
    gen = _generator_matrix(a)
    gen_norm = float(np.linalg.norm(gen))
    if gen.shape[1] == 0 or gen_norm == 0.0:
        raise InfeasibleError("the tangent space is trivial")
    space = tangent_basis(a)
    wanted_idx = [i * n + j for i, j in targets]
    strict = [k for k in range(m * n) if k not in set(wanted_idx)]
    relaxed = [i * n + j for i, j in base.zeros() if not wanted[i, j]]
    floor = TANGENT_RESIDUAL_TOL * gen_norm
    rng = np.random.default_rng(cfg.rng_seed)
    for label, rows in (("strict", strict), ("relaxed", relaxed)):
        coeffs = _spread_direction(gen, rows, wanted_idx, floor, rng)
        if coeffs is None:
            logger.debug("[flow] liberation_direction %s pass found nothing", label)
            continue
        d = (gen @ coeffs).reshape(m, n)
        d = d / float(np.linalg.norm(d.ravel()[wanted_idx]))
        if d.ravel()[wanted_idx[0]] < 0:
            d = -d
        leak = float(np.max(np.abs(d.ravel()[rows]))) if rows else 0.0
        if leak > TANGENT_RESIDUAL_TOL * float(np.linalg.norm(d)):
            logger.debug("[flow] liberation_direction %s pass leaks %.3e", label, leak)
            continue
        if not space.contains(d):
            logger.debug("[flow] liberation_direction %s pass left the tangent space", label)
            continue
        logger.info("[flow] liberation_direction %s pass succeeded", label)
        return d
    raise InfeasibleError("no tangent direction is nonzero on every wanted position")


def _spread_direction(
    gen: DenseMatrix,
    rows: list[int],
    wanted_idx: list[int],
    floor: float,
    rng: np.random.Generator,
) -> np.ndarray | None:
    """
    Unit generator coefficients vanishing on ``rows`` and nonzero on every wanted row.

    ``floor`` is the absolute size below which a value on a wanted row counts as zero.
    """
    free = nullspace(gen[rows], TANGENT_RESIDUAL_TOL) if rows else np.eye(gen.shape[1])
    if free.shape[1] == 0:
        return None
    hit = gen[wanted_idx] @ free
    if float(np.linalg.norm(hit)) <= floor:
        return None
    _, s, vt = scipy.linalg.svd(hit, full_matrices=False)
    r = int(np.count_nonzero(s > floor))
    if r == 0:
        return None
    if r == 1:
        candidates = [vt[0]]
    else:
        candidates = [vt[:r].T @ rng.standard_normal(r) for _ in range(DIRECTION_SAMPLES)]
    best, best_score = None, 0.0
    for w in candidates:
        w = w / float(np.linalg.norm(w))
        values = hit @ w
        smallest = float(np.min(np.abs(values)))
        if smallest <= floor:
            continue
        score = smallest / float(np.linalg.norm(values))
        if score > best_score:
            best, best_score = w, score
    if best is None or best_score <= DIRECTION_SPREAD_TOL:
        return None
    return free @ best


def liberate(
    A: object,
    D: object,
    cfg: SolverConfig | None = None,
    trace: TraceCallback | None = None,
) -> RealizationResult:
    """
    Free the zeros of A along a tangent direction D, keeping the singular values.

    S is the pattern of A in the direction of D, and D_hat is D rescaled to the
    Frobenius norm of A. Starting from exp(tK0) A exp(tL0), where D_hat = K0 A + A L0,
    the solver asks Q A R to vanish on the zeros of S and to equal t * D_hat on the
    new positions of S. t backtracks from ``cfg.liberation_t0`` down to
    ``cfg.liberation_min_t`` until the output has pattern S. When no step solves
    that system, the new positions are released and only the zeros of S are
    imposed; the result then carries a note saying so.

    Raises:
        NotInTangentSpaceError: D is not of the form K A + A L.
        SsvpRequiredError: A lacks the SSVP relative to S.
        NoConvergenceError: no step size produced pattern S.
    """
    cfg = cfg or SolverConfig()
    a = as_matrix(A, "A")
    d = as_matrix(D, "D")
    if d.shape != a.shape:
        raise InvalidInputError(f"D has shape {d.shape}, expected {a.shape}")
    base = pattern_of(a)
    sigmas = singular_values(a)
    d_norm = float(np.linalg.norm(d))
    if d_norm == 0.0:
        return build_result(a, sigmas, "liberate", base)

    coeffs, resid = _tangent_coordinates(a, d)
    if resid > TANGENT_RESIDUAL_TOL * d_norm:
        raise NotInTangentSpaceError(
            f"D is not of the form K A + A L (residual {resid:.3e}, |D| = {d_norm:.3e})"
        )
    target_pattern = _direction_pattern(a, base, d)
    if target_pattern == base:
        return build_result(a, sigmas, "liberate", base)
    try:
        cert = check_ssvp_wrt(a, target_pattern, mode="exact-when-rational")
    except BorderlineRankError as exc:
        raise SsvpRequiredError(str(exc), relative=True) from exc
    if not cert.has_ssvp:
        raise SsvpRequiredError(
            "liberate needs the SSVP relative to the liberated pattern", cert, relative=True
        )

    m, n = a.shape
    mk = len(lower_positions(m))
    scale = max(float(np.linalg.norm(a)), 1e-300) / d_norm
    walk = _LiberationWalk(
        a=a,
        direction=scale * d,
        k0=skew_from_lower(coeffs[:mk] * scale, m),
        l0=skew_from_lower(coeffs[mk:] * scale, n),
        target_pattern=target_pattern,
        new=target_pattern.mask() & ~base.mask(),
    )
    logger.info("[flow] liberate start shape=%s new_entries=%d", a.shape, int(walk.new.sum()))
    best = float("inf")
    total_iters = 0
    for pinned in (True, False):
        found, best_here, iters = walk.run(cfg, pinned, trace)
        best = min(best, best_here)
        total_iters += iters
        if found is None:
            if pinned:
                logger.warning(
                    "[flow] liberate could not follow t * D on the new positions; "
                    "imposing the zeros of S only"
                )
            continue
        x, sol, t = found
        notes = [f"step t={t:.6g}"]
        if not pinned:
            notes.append("new positions released from t * D")
        logger.info("[flow] liberate converged t=%.3g iters=%d", t, total_iters)
        return build_result(
            x,
            sigmas,
            "liberate",
            target_pattern,
            iterations=total_iters,
            residual=sol.residual,
            factor_defect=sol.factor_defect,
            ssvp=_ssvp_verdict(x),
            notes=tuple(notes),
        )
    raise NoConvergenceError(
        "liberate found no step producing the liberated pattern",
        best_residual=best,
        iterations=total_iters,
    )


@dataclass(frozen=True)
class _LiberationWalk:
    """The backtracking walk along t * D_hat for one liberation."""

    a: DenseMatrix
    direction: DenseMatrix
    k0: DenseMatrix
    l0: DenseMatrix
    target_pattern: Pattern
    new: np.ndarray

    def run(
        self, cfg: SolverConfig, pinned: bool, trace: TraceCallback | None
    ) -> tuple[tuple[DenseMatrix, _OrbitSolution, float] | None, float, int]:
        """Return ((output, solution, t) or None, best residual, iterations)."""
        imposed = ~self.target_pattern.mask()
        if pinned:
            imposed = imposed | self.new
        rows = np.flatnonzero(imposed.ravel())
        tol = _tolerance(self.a, cfg)
        t = cfg.liberation_t0
        best = float("inf")
        iters = 0
        while t >= cfg.liberation_min_t:
            if pinned:
                target = np.where(self.new, t * self.direction, 0.0)
            else:
                target = np.zeros_like(self.a)
            problem = _OrbitProblem(self.a, target, [], rows=rows)
            problem.left = expm_skew(t * self.k0)
            problem.right = expm_skew(t * self.l0)
            label = f"liberate[t={t:.3g}{'' if pinned else ', released'}]"
            try:
                sol = _levenberg_marquardt(problem, cfg, tol, label, trace)
            except NoConvergenceError as exc:
                best = min(best, exc.best_residual)
                iters += exc.iterations
            else:
                iters += sol.iterations
                x = np.where(self.target_pattern.mask(), sol.product, 0.0)
                if not _pattern_mismatch(x, self.target_pattern):
                    return (x, sol, t), min(best, sol.residual), iters
                best = min(best, sol.residual)
            t *= cfg.step_backtrack
            logger.debug("[flow] liberate backtracking to t=%.3g", t)
        return None, best, iters
