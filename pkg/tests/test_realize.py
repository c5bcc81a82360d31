from __future__ import annotations

import numpy as np
import pytest

from ssvpkit.errors import InfeasibleError, InvalidInputError
from ssvpkit.pattern import Pattern, classify_bigraph, parse_pattern, pattern_of
from ssvpkit.realize import (
    allows_zero_with_distinct,
    cycle_pattern,
    leading_minors,
    nowhere_zero_orthogonal,
    realize_all_ones_block,
    realize_c6,
    realize_cycle_with_zero,
    realize_distinct,
    realize_orthonormal_scaled,
    realize_path,
    staircase_pattern,
)

# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def test_leading_minors_of_a_tridiagonal_matrix() -> None:
    m = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
    assert np.allclose(leading_minors(m), [1.0, 2.0, 3.0, 4.0])


def test_staircase_pattern() -> None:
    assert staircase_pattern(2) == parse_pattern("110\n011\n")
    assert classify_bigraph(staircase_pattern(3)).tag == "path-odd"


def test_realize_path_small_list() -> None:
    result = realize_path([3.0, 2.0, 1.0])
    assert result.matrix.shape == (3, 4)
    assert result.pattern_ok
    assert result.sigma_error <= 1e-10
    assert result.method == "path"


def test_realize_path_on_seeded_lists(rng: np.random.Generator) -> None:
    for _ in range(50):
        n = int(rng.integers(1, 9))
        values = np.sort(rng.choice(np.arange(1, 101), size=n, replace=False))[::-1] / 10.0
        result = realize_path(values)
        assert result.pattern_ok, values
        assert result.target_pattern == staircase_pattern(n)
        assert result.sigma_error <= 1e-10, values
        btb = result.matrix.T @ result.matrix
        assert np.array_equal(np.triu(btb, 2), np.zeros_like(btb))


def test_realize_path_rejects_repeated_and_zero_values() -> None:
    with pytest.raises(InfeasibleError):
        realize_path([2.0, 2.0, 1.0])
    with pytest.raises(InfeasibleError):
        realize_path([2.0, 1.0, 0.0])
    with pytest.raises(InvalidInputError):
        realize_path([])


# ---------------------------------------------------------------------------
# The 3 x 3 cycle
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "sigmas",
    [(3.0, 2.0, 1.0), (2.0, 1.0, 0.0), (1.0, 1.0, 0.0), (2.0, 1.0, 1.0), (2.0, 2.0, 1.0)],
)
def test_realize_c6_feasible_lists(c6: Pattern, sigmas: tuple[float, float, float]) -> None:
    result = realize_c6(sigmas)
    assert pattern_of(result.matrix) == c6
    assert result.pattern_ok
    assert result.sigma_error <= 1e-8
    assert result.requested_sigmas.values == sigmas


def test_realize_c6_with_two_equal_values_and_a_zero_is_closed_form() -> None:
    result = realize_c6([3.0, 3.0, 0.0])
    assert result.method == "c6-closed-form"
    assert result.iterations == 0


@pytest.mark.parametrize(
    ("sigmas", "reason"),
    [
        ((1.0, 1.0, 1.0), "sigma1 == sigma3"),
        ((4.0, 0.0, 0.0), "sigma2 == 0"),
        ((2.0, 1.5, 2.0), "sigma1 == sigma3"),
    ],
)
def test_realize_c6_infeasible_lists(sigmas: tuple[float, float, float], reason: str) -> None:
    with pytest.raises(InfeasibleError) as excinfo:
        realize_c6(sigmas)
    assert excinfo.value.reason == reason


def test_realize_c6_input_errors() -> None:
    with pytest.raises(InvalidInputError):
        realize_c6([2.0, 1.0])
    with pytest.raises(InvalidInputError):
        realize_c6([2.0, -1.0, 0.5])


# ---------------------------------------------------------------------------
# Distinct values on patterns of full term rank
# ---------------------------------------------------------------------------


def test_realize_distinct_on_a_wide_pattern() -> None:
    pattern = parse_pattern("1101\n0110\n")
    result = realize_distinct(pattern, [3.0, 1.0])
    assert result.pattern_ok
    assert pattern_of(result.matrix) == pattern
    assert result.sigma_error <= 1e-8


def test_realize_distinct_on_a_tall_pattern() -> None:
    pattern = parse_pattern("10\n11\n01\n")
    result = realize_distinct(pattern, [2.0, 0.5])
    assert result.matrix.shape == (3, 2)
    assert result.pattern_ok
    assert result.sigma_error <= 1e-8


def test_realize_distinct_rejects_bad_requests() -> None:
    with pytest.raises(InfeasibleError):
        realize_distinct(parse_pattern("10\n10\n"), [2.0, 1.0])
    with pytest.raises(InvalidInputError):
        realize_distinct(Pattern.full(2, 2), [1.0, 1.0])
    with pytest.raises(InvalidInputError):
        realize_distinct(Pattern.full(2, 2), [1.0])


# ---------------------------------------------------------------------------
# Cycles with one zero value
# ---------------------------------------------------------------------------


def test_cycle_pattern_layout(c6: Pattern) -> None:
    assert cycle_pattern(2) == Pattern.full(2, 2)
    assert cycle_pattern(3) == parse_pattern("101\n110\n011\n")
    assert cycle_pattern(3).transpose() == c6
    assert classify_bigraph(cycle_pattern(4)).tag == "cycle-2n"


@pytest.mark.parametrize("n", [1, 2])
def test_realize_cycle_with_zero_small_orders(n: int) -> None:
    result = realize_cycle_with_zero(n, [2.0, 0.0])
    assert np.allclose(result.matrix, np.ones((2, 2)))
    assert result.pattern_ok
    assert result.sigma_error <= 1e-12


@pytest.mark.parametrize("sigmas", [(3.0, 2.0, 0.0), (4.0, 3.0, 2.0, 0.0)])
def test_realize_cycle_with_zero_by_liberation(sigmas: tuple[float, ...]) -> None:
    result = realize_cycle_with_zero(len(sigmas), sigmas)
    assert pattern_of(result.matrix) == cycle_pattern(len(sigmas))
    assert result.sigma_error <= 1e-8
    assert result.method == "cycle"


def test_realize_cycle_with_zero_needs_exactly_one_zero() -> None:
    with pytest.raises(InfeasibleError):
        realize_cycle_with_zero(3, [3.0, 2.0, 1.0])
    with pytest.raises(InfeasibleError):
        realize_cycle_with_zero(3, [3.0, 0.0, 0.0])
    with pytest.raises(InvalidInputError):
        realize_cycle_with_zero(3, [3.0, 0.0])
    with pytest.raises(InvalidInputError):
        realize_cycle_with_zero(0, [])


def test_allows_zero_with_distinct(c6: Pattern) -> None:
    assert allows_zero_with_distinct(c6)
    assert not allows_zero_with_distinct(parse_pattern("110\n011\n001\n"))
    with pytest.raises(InvalidInputError):
        allows_zero_with_distinct(Pattern.full(2, 3))
    with pytest.raises(InvalidInputError):
        allows_zero_with_distinct(parse_pattern("10\n10\n"))


# ---------------------------------------------------------------------------
# Orthonormal rows and all-ones blocks
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_nowhere_zero_orthogonal(k: int) -> None:
    q = nowhere_zero_orthogonal(k)
    assert np.allclose(q @ q.T, np.eye(k), atol=1e-14)
    assert np.all(q != 0.0)


def test_realize_orthonormal_scaled_keeps_the_pattern_of_q() -> None:
    q = nowhere_zero_orthogonal(3)[:2]
    result = realize_orthonormal_scaled(q, [2.0, 5.0])
    assert result.requested_sigmas.values == (5.0, 2.0)
    assert result.sigma_error <= 1e-12
    assert result.pattern_ok
    assert pattern_of(result.matrix) == Pattern.full(2, 3)


def test_realize_orthonormal_scaled_rejects_bad_input() -> None:
    with pytest.raises(InvalidInputError):
        realize_orthonormal_scaled(np.ones((2, 3)), [1.0, 1.0])
    with pytest.raises(InvalidInputError):
        realize_orthonormal_scaled(np.eye(2), [1.0])
    with pytest.raises(InvalidInputError):
        realize_orthonormal_scaled(np.eye(2), [1.0, 0.0])


def test_realize_all_ones_block_with_zero_columns() -> None:
    pattern = parse_pattern("1101\n1101\n")
    result = realize_all_ones_block(pattern, [3.0, 1.0])
    assert result.pattern_ok
    assert result.sigma_error <= 1e-12

    tall = realize_all_ones_block(pattern.transpose(), [3.0, 1.0])
    assert tall.matrix.shape == (4, 2)
    assert tall.pattern_ok
    assert tall.sigma_error <= 1e-12


def test_realize_all_ones_block_rejects_other_patterns() -> None:
    with pytest.raises(InfeasibleError):
        realize_all_ones_block(parse_pattern("1100\n0110\n"), [2.0, 1.0])
    with pytest.raises(InvalidInputError):
        realize_all_ones_block(Pattern.full(2, 2), [2.0, 0.0])
    with pytest.raises(InvalidInputError):
        realize_all_ones_block(Pattern.full(2, 2), [2.0])
