"""
Zero-nonzero patterns: bigraph and digraph views, term rank, text/JSON formats.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import NamedTuple

import networkx as nx
import numpy as np

from ssvpkit.errors import AmbiguousPatternError, InvalidInputError, MalformedInputError
from ssvpkit.numerics import as_matrix

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-10
AMBIGUITY_TOL = 1e-8


@dataclass(frozen=True)
class Pattern:
    """An m x n 0/1 matrix, stored row-major."""

    rows: int
    cols: int
    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        cells = tuple(int(c) for c in self.cells)
        if self.rows < 1 or self.cols < 1:
            raise InvalidInputError(
                f"pattern dimensions must be positive (got {self.rows}x{self.cols})"
            )
        if len(cells) != self.rows * self.cols:
            raise InvalidInputError(
                f"pattern needs {self.rows * self.cols} cells (got {len(cells)})"
            )
        if any(c not in (0, 1) for c in cells):
            raise InvalidInputError("pattern cells must be 0 or 1")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_array(cls, array: object) -> Pattern:
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise InvalidInputError("pattern array must be two-dimensional")
        return cls(arr.shape[0], arr.shape[1], tuple(int(v) for v in arr.ravel()))

    @classmethod
    def full(cls, rows: int, cols: int) -> Pattern:
        return cls(rows, cols, (1,) * (rows * cols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_array(self) -> np.ndarray:
        return np.array(self.cells, dtype=np.int64).reshape(self.rows, self.cols)

    def mask(self) -> np.ndarray:
        return self.to_array().astype(bool)

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        return self.cells[i * self.cols + j]

    def ones(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.rows) for j in range(self.cols) if self[i, j]]

    def zeros(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.rows) for j in range(self.cols) if not self[i, j]]

    def transpose(self) -> Pattern:
        return Pattern.from_array(self.to_array().T)

    def union(self, other: Pattern) -> Pattern:
        _check_same_shape(self, other)
        return Pattern.from_array(self.to_array() | other.to_array())

    def __str__(self) -> str:
        return serialize_pattern(self)

    def bigraph(self) -> nx.Graph:
        """Bipartite graph with row vertices ("r", i) and column vertices ("c", j)."""
        g = nx.Graph()
        g.add_nodes_from((("r", i) for i in range(self.rows)), bipartite=0)
        g.add_nodes_from((("c", j) for j in range(self.cols)), bipartite=1)
        g.add_edges_from((("r", i), ("c", j)) for i, j in self.ones())
        return g

    def digraph(self) -> nx.DiGraph:
        """Loopless digraph of a square pattern: arc i -> j iff i != j and p_ij = 1."""
        if self.rows != self.cols:
            raise InvalidInputError("the digraph view needs a square pattern")
        g = nx.DiGraph()
        g.add_nodes_from(range(self.rows))
        g.add_edges_from((i, j) for i, j in self.ones() if i != j)
        return g


def _check_same_shape(p: Pattern, q: Pattern) -> None:
    if p.shape != q.shape:
        raise InvalidInputError(f"pattern shapes differ: {p.shape} vs {q.shape}")


def pattern_of(
    M: object, zero_tol: float = ZERO_TOL, ambiguity_tol: float = AMBIGUITY_TOL
) -> Pattern:
    """
    Pattern of a real matrix, with tolerances relative to the largest |entry|.

    Raises:
        AmbiguousPatternError: some entry lies in (zero_tol, ambiguity_tol] * max|m_ij|.
    """
    if not 0 <= zero_tol < ambiguity_tol:
        raise InvalidInputError("need 0 <= zero_tol < ambiguity_tol")
    arr = np.abs(as_matrix(M))
    scale = float(arr.max()) if arr.size else 0.0
    if scale == 0.0:
        return Pattern(arr.shape[0], arr.shape[1], (0,) * arr.size)
    nonzero = arr > ambiguity_tol * scale
    zero = arr <= zero_tol * scale
    band = ~(nonzero | zero)
    if band.any():
        raise AmbiguousPatternError([tuple(int(v) for v in p) for p in np.argwhere(band)])
    return Pattern.from_array(nonzero.astype(np.int64))


def is_superpattern(P: Pattern, Q: Pattern) -> bool:
    """True iff P is obtained from Q by changing some zeros to ones."""
    _check_same_shape(P, Q)
    return all(p >= q for p, q in zip(P.cells, Q.cells))


# ---------------------------------------------------------------------------
# Matchings
# ---------------------------------------------------------------------------


def maximum_matching(P: Pattern) -> list[tuple[int, int]]:
    """
    One maximum matching, as (row, col) positions sorted by row.

    Augmenting paths are grown from the rows in ascending order, trying columns in
    ascending order, so the result depends only on P.
    """
    row_of_col: dict[int, int] = {}

    def augment(i: int, seen: set[int]) -> bool:
        for j in range(P.cols):
            if P[i, j] and j not in seen:
                seen.add(j)
                if j not in row_of_col or augment(row_of_col[j], seen):
                    row_of_col[j] = i
                    return True
        return False

    for i in range(P.rows):
        augment(i, set())
    return sorted((i, j) for j, i in row_of_col.items())


def term_rank(P: Pattern) -> int:
    """Largest number of ones with no two in the same row or column."""
    return len(maximum_matching(P))


def konig_zero_block(P: Pattern) -> tuple[list[int], list[int]] | None:
    """
    An r x s zero submatrix with r + s = m + n - term_rank(P), or None at full row term rank.

    Built from the König cover of a maximum matching: rows reachable from unmatched
    rows by alternating paths, and the columns those rows cannot reach.
    """
    matching = maximum_matching(P)
    if len(matching) == P.rows:
        return None
    row_of_col = {j: i for i, j in matching}
    matched_rows = {i for i, _ in matching}
    reach_rows = {i for i in range(P.rows) if i not in matched_rows}
    reach_cols: set[int] = set()
    frontier = list(reach_rows)
    while frontier:
        i = frontier.pop()
        for j in range(P.cols):
            if P[i, j] and j not in reach_cols:
                reach_cols.add(j)
                k = row_of_col.get(j)
                if k is not None and k not in reach_rows:
                    reach_rows.add(k)
                    frontier.append(k)
    return sorted(reach_rows), [j for j in range(P.cols) if j not in reach_cols]


def matching_permutation(P: Pattern) -> list[int]:
    """Column order placing a maximum matching on the diagonal (matched columns first)."""
    matching = maximum_matching(P)
    if len(matching) < P.rows:
        raise InvalidInputError("pattern has term rank below its row count")
    order = [j for _, j in matching]
    return order + [j for j in range(P.cols) if j not in order]


# ---------------------------------------------------------------------------
# Graph views
# ---------------------------------------------------------------------------


class BigraphShape(NamedTuple):
    """Shape tag plus the row/column orders of the canonical staircase."""

    tag: str
    row_order: list[int]
    col_order: list[int]


def classify_bigraph(P: Pattern) -> BigraphShape:
    """
    Detect a single path or a single cycle in the bigraph.

    For a path, the walk starts at its end of lowest index (a row when the path
    starts and ends on rows, else the end vertex listed first); for a cycle it
    starts at row 0 and leaves along its lowest column. The returned orders list
    rows and columns in walk order, giving the staircase (i,i),(i,i+1) for paths
    and (1,1),(2,1),(2,2),...,(1,n) for cycles.
    """
    g = P.bigraph()
    other = BigraphShape("other", list(range(P.rows)), list(range(P.cols)))
    if g.number_of_edges() == 0 or not nx.is_connected(g):
        return other
    degrees = dict(g.degree())
    if max(degrees.values()) > 2:
        return other
    nodes = g.number_of_nodes()
    if g.number_of_edges() == nodes - 1:
        ends = sorted((v for v, d in degrees.items() if d == 1), key=_vertex_key)
        walk = _walk(g, ends[0])
        tag = "path-odd" if nodes % 2 == 1 else "path-even"
    elif all(d == 2 for d in degrees.values()):
        walk = _walk(g, ("r", 0))
        tag = "cycle-2n"
    else:
        return other
    return BigraphShape(
        tag,
        [v[1] for v in walk if v[0] == "r"],
        [v[1] for v in walk if v[0] == "c"],
    )


def _vertex_key(v: tuple[str, int]) -> tuple[int, int]:
    return (0 if v[0] == "r" else 1, v[1])


def _walk(g: nx.Graph, start: tuple[str, int]) -> list[tuple[str, int]]:
    walk = [start]
    seen = {start}
    while True:
        nxt = sorted((v for v in g.neighbors(walk[-1]) if v not in seen), key=_vertex_key)
        if not nxt:
            return walk
        walk.append(nxt[0])
        seen.add(nxt[0])


def digraph_has_cycle(P: Pattern) -> bool:
    """True iff the loopless digraph of P has a directed cycle of length two or more."""
    if P.rows != P.cols or any(not P[i, i] for i in range(P.rows)):
        raise InvalidInputError(
            "digraph_has_cycle needs a square pattern with ones on the diagonal"
        )
    return not nx.is_directed_acyclic_graph(P.digraph())


# ---------------------------------------------------------------------------
# Text and JSON formats
# ---------------------------------------------------------------------------


def parse_pattern(text: str) -> Pattern:
    """Parse one row per line of '0'/'1' characters; spaces are ignored."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    rows: list[list[int]] = []
    for lineno, line in enumerate(lines, start=1):
        row = []
        for colno, ch in enumerate(line, start=1):
            if ch in " \t\r":
                continue
            if ch not in "01":
                raise MalformedInputError(f"unexpected character {ch!r}", line=lineno, column=colno)
            row.append(int(ch))
        if not row:
            raise MalformedInputError("empty row", line=lineno, column=1)
        if rows and len(row) != len(rows[0]):
            raise MalformedInputError(
                f"ragged row: expected {len(rows[0])} cells, found {len(row)}", line=lineno
            )
        rows.append(row)
    if not rows:
        raise MalformedInputError("pattern text is empty", line=1, column=1)
    return Pattern(len(rows), len(rows[0]), tuple(c for r in rows for c in r))


def serialize_pattern(P: Pattern) -> str:
    return "\n".join(
        "".join(str(P[i, j]) for j in range(P.cols)) for i in range(P.rows)
    ) + "\n"


def pattern_to_json(P: Pattern) -> dict[str, object]:
    return {"rows": P.rows, "cols": P.cols, "cells": list(P.cells)}


def pattern_from_json(data: object) -> Pattern:
    if not isinstance(data, dict) or not {"rows", "cols", "cells"} <= set(data):
        raise MalformedInputError('pattern JSON needs "rows", "cols" and "cells"')
    return Pattern(int(data["rows"]), int(data["cols"]), tuple(data["cells"]))


def loads_pattern(text: str) -> Pattern:
    """Parse either the text format or the JSON format."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(exc.msg, line=exc.lineno, column=exc.colno) from exc
        return pattern_from_json(data)
    return parse_pattern(text)
