"""Shared fixtures: worked-example matrices, reference verification matrices, the 3 x 3 cycle."""

from __future__ import annotations

import numpy as np
import pytest

from ssvpkit.pattern import Pattern

PSI_A = [
    [1, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, -1, 0, 1, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, -1, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, -1, 0, 0, 1, -1, 0, 0, 1, 0, 0],
    [0, 0, 0, -1, 0, 0, 0, -1, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, -1],
    [0, -1, -1, 0, 1, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, -1, -1, 0, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, -1, -1, 0, 1, 1, 0],
]

PHI_A = [
    [0, 0, 1, 0, 0, 0],
    [-1, 0, 1, 0, 1, 0],
    [0, -1, 0, 0, 1, 0],
    [-1, 0, 0, 0, 0, 1],
    [0, -1, 0, -1, 0, 1],
    [0, 0, 0, -1, 0, 0],
    [-1, 0, 1, 0, 0, 0],
    [-1, -1, 0, 0, 1, 1],
    [0, 0, 0, -1, 0, 1],
]

PSI_B = [
    [1, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, -1, 0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, -1, 0, 0, 1, -1, 0, 0, 0, 0, 0],
    [0, 0, 0, -1, 0, 0, 0, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0],
    [0, -1, -1, 0, 1, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0],
]

# The columns of PSI_B at the zeros of B. PHI_B_SHIFTED has the (2,4) column one
# row too high.
PHI_B = [
    [0, 0, 1, 0, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 0, 0],
    [-1, 0, 0, 0, 0, 0, 0, 0],
    [0, -1, 0, -1, 0, 0, 0, 0],
    [0, 0, 0, -1, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 1, 1, 0],
]

PHI_B_SHIFTED = [
    [0, 0, 1, 0, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 0, 0],
    [-1, 0, 0, -1, 0, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [-1, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 1, 1, 0],
]


@pytest.fixture
def example_a() -> np.ndarray:
    return np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]], dtype=float)


@pytest.fixture
def example_b() -> np.ndarray:
    return np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 0, 0]], dtype=float)


@pytest.fixture
def c6() -> Pattern:
    return Pattern(3, 3, (1, 1, 0, 0, 1, 1, 1, 0, 1))


@pytest.fixture
def q_example() -> np.ndarray:
    """[[Q, 0], [e_5^T, 1]] with Q = I_5 - (2/5) J."""
    out = np.zeros((6, 6))
    out[:5, :5] = np.eye(5) - 0.4 * np.ones((5, 5))
    out[5, 4] = 1.0
    out[5, 5] = 1.0
    return out


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
