from __future__ import annotations

import numpy as np
import pytest

from ssvpkit.classify import (
    NO_RULE,
    Transform,
    allows_all_nonzero_lists,
    check_direct_sum_conditions,
    classify_ssvp,
    compose_transforms,
    equivalence_transform,
    zero_pattern_only,
)
from ssvpkit.errors import InvalidInputError
from ssvpkit.pattern import Pattern, parse_pattern, pattern_of, term_rank
from ssvpkit.verify import HAS_SSVP, LACKS_SSVP, check_ssvp, validate_certificate


def _random_integer_matrix(rng: np.random.Generator, max_rows: int, max_cols: int) -> np.ndarray:
    m = int(rng.integers(1, max_rows + 1))
    n = int(rng.integers(1, max_cols + 1))
    return rng.integers(-2, 3, size=(m, n)).astype(float)


def _random_transform(rng: np.random.Generator, kind: str, shape: tuple[int, int]) -> Transform:
    if kind == "transpose":
        return Transform(kind)
    size = shape[0] if kind.startswith("row") else shape[1]
    if kind.endswith("perm"):
        return Transform(kind, tuple(rng.permutation(size)))
    return Transform(kind, tuple(rng.choice([-1, 1], size=size)))


@pytest.mark.parametrize(
    ("matrix", "verdict", "rule"),
    [
        ([[1, 2, 0], [0, 0, 0]], LACKS_SSVP, "R2"),
        ([[1, 0], [2, 0]], LACKS_SSVP, "R2"),
        ([[1, 1, 1], [1, 0, 0], [1, 0, 0]], LACKS_SSVP, "R7"),
        ([[1, 2, 3], [4, 5, 6]], HAS_SSVP, "R1"),
        ([[1, 0, 2]], HAS_SSVP, "R3"),
        ([[1, 0], [0, 2]], HAS_SSVP, "R4"),
        ([[1, 0], [0, -1]], LACKS_SSVP, "R4"),
        ([[1, 0, 0], [0, 2, 0]], HAS_SSVP, "R5"),
        ([[1, 0, 0], [0, 1, 0]], LACKS_SSVP, "R5"),
        ([[1, 2, 0], [2, 4, 0]], LACKS_SSVP, "R5"),
        ([[1, 1, 0], [0, 1, 1]], HAS_SSVP, "R6"),
        ([[1, 1, 0], [0, 0, 1]], HAS_SSVP, "R6"),
        ([[1, 2, 0, 0], [0, 0, 2, 1]], LACKS_SSVP, "R6"),
        ([[1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 2]], HAS_SSVP, "R8"),
        ([[1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]], LACKS_SSVP, "R8"),
    ],
)
def test_rule_chain_examples(matrix: list[list[float]], verdict: str, rule: str) -> None:
    a = np.array(matrix, dtype=float)
    result = classify_ssvp(a)
    assert (result.verdict, result.rule) == (verdict, rule)
    assert check_ssvp(a, mode="exact-when-rational").verdict == verdict
    if verdict == LACKS_SSVP:
        assert result.certificate is not None
        assert validate_certificate(a, result.certificate).valid


def test_rule_names_follow_the_catalog() -> None:
    assert classify_ssvp(np.ones((2, 2))).rule_name == "nowhere-zero"
    assert classify_ssvp([[1.0, 0.0], [0.0, 0.0]]).rule_name == "zero-line"


def test_tall_matrices_are_classified_through_the_transpose() -> None:
    a = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 0.0]])
    result = classify_ssvp(a)
    assert result.verdict == LACKS_SSVP
    assert result.certificate.shape == (3, 2)
    assert validate_certificate(a, result.certificate).valid


def test_connected_cycle_pattern_has_no_closed_form_rule() -> None:
    result = classify_ssvp([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]])
    assert result.verdict == NO_RULE
    assert result.rule is None
    assert result.rule_name is None


def test_direct_sum_conditions_report_each_flag() -> None:
    report = check_direct_sum_conditions([[1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]])
    assert (report.a, report.b, report.c, report.d) == (True, True, True, True)
    assert report.verdict == HAS_SSVP

    common = check_direct_sum_conditions([[1.0, 1.0]], [[1.0, 1.0]])
    assert not common.c
    assert common.verdict == LACKS_SSVP
    total = np.array([[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
    assert validate_certificate(total, common.certificate).valid


def test_direct_sum_with_two_dependent_row_blocks() -> None:
    a = np.ones((2, 3))
    b = np.ones((2, 1))
    report = check_direct_sum_conditions(a, b)
    assert not report.d
    assert report.verdict == LACKS_SSVP
    total = np.zeros((4, 4))
    total[:2, :3] = a
    total[2:, 3:] = b
    assert validate_certificate(total, report.certificate).valid


def test_equivalence_transforms() -> None:
    a = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    assert np.array_equal(equivalence_transform(a, "transpose"), a.T)
    assert np.array_equal(equivalence_transform(a, ("row-perm", [1, 0])), a[[1, 0]])
    col_perm = equivalence_transform(a, Transform("col-perm", (2, 0, 1)))
    assert np.array_equal(col_perm, a[:, [2, 0, 1]])
    row_signs = equivalence_transform(a, ("row-signs", [1, -1]))
    assert np.array_equal(row_signs, [[1, 2, 3], [-4, -5, -6]])
    assert np.array_equal(
        compose_transforms(a, [Transform("transpose"), Transform("col-signs", (-1, 1))]),
        [[-1.0, 4.0], [-2.0, 5.0], [-3.0, 6.0]],
    )
    with pytest.raises(InvalidInputError):
        equivalence_transform(a, ("row-perm", [0, 0]))
    with pytest.raises(InvalidInputError):
        equivalence_transform(a, ("col-signs", [1, 2, 1]))
    with pytest.raises(InvalidInputError):
        Transform("rotate")


def test_allows_all_nonzero_lists() -> None:
    assert allows_all_nonzero_lists(parse_pattern("1101\n1101\n"))
    assert not allows_all_nonzero_lists(parse_pattern("1100\n0110\n"))
    assert not allows_all_nonzero_lists(parse_pattern("1000\n1000\n"))
    with pytest.raises(InvalidInputError):
        allows_all_nonzero_lists(Pattern.full(3, 2))


def test_zero_pattern_only() -> None:
    assert zero_pattern_only(Pattern(2, 2, (0, 0, 0, 0)))
    assert not zero_pattern_only(Pattern(1, 2, (0, 1)))


@pytest.mark.slow
def test_classifier_agrees_with_verifier_on_seeded_corpus(rng: np.random.Generator) -> None:
    decided = 0
    for _ in range(1000):
        a = _random_integer_matrix(rng, 4, 5)
        cert = check_ssvp(a, mode="exact-when-rational")
        if cert.has_ssvp:
            assert term_rank(pattern_of(a)) == min(a.shape)
        result = classify_ssvp(a)
        if result.verdict == NO_RULE:
            continue
        decided += 1
        assert result.verdict == cert.verdict, (a.tolist(), result.rule)
        if result.certificate is not None:
            assert validate_certificate(a, result.certificate).valid, (a.tolist(), result.rule)
    assert decided > 500


@pytest.mark.slow
def test_verdict_is_invariant_under_equivalence_transforms(rng: np.random.Generator) -> None:
    for _ in range(200):
        a = _random_integer_matrix(rng, 4, 5)
        expected = check_ssvp(a, mode="exact-when-rational").verdict
        for kind in Transform.KINDS:
            op = _random_transform(rng, kind, a.shape)
            transformed = equivalence_transform(a, op)
            assert check_ssvp(transformed, mode="exact-when-rational").verdict == expected
        for _ in range(3):
            chosen = []
            shape = a.shape
            for kind in rng.choice(Transform.KINDS, size=3):
                chosen.append(_random_transform(rng, str(kind), shape))
                if kind == "transpose":
                    shape = shape[::-1]
            transformed = compose_transforms(a, chosen)
            assert check_ssvp(transformed, mode="exact-when-rational").verdict == expected
