"""
Matrix file formats and JSON reports.

Reports index rows, columns and pivot rows from 1.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ssvpkit.classify import ClosedFormVerdict
from ssvpkit.errors import MalformedInputError
from ssvpkit.numerics import DenseMatrix, as_matrix
from ssvpkit.pattern import Pattern, loads_pattern, serialize_pattern
from ssvpkit.types import RealizationResult
from ssvpkit.verify import SsvpCertificate


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def matrix_to_json(M: object) -> dict[str, Any]:
    arr = as_matrix(M)
    return {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "data": [float(v) for v in arr.ravel()],
    }


def matrix_from_json(data: object) -> DenseMatrix:
    """
    Read {"rows": m, "cols": n, "data": [...]}.

    ``data`` is either the row-major flat list or a list of rows.
    """
    if not isinstance(data, dict) or "data" not in data:
        raise MalformedInputError('matrix JSON needs a "data" field')
    values = data["data"]
    if not isinstance(values, list) or not values:
        raise MalformedInputError('"data" must be a nonempty list')
    if all(isinstance(row, list) for row in values):
        width = len(values[0])
        for k, row in enumerate(values, start=1):
            if len(row) != width:
                raise MalformedInputError(
                    f"ragged row {k}: expected {width} entries, found {len(row)}"
                )
        rows, cols = len(values), width
        flat = [v for row in values for v in row]
    else:
        try:
            rows, cols = int(data["rows"]), int(data["cols"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError('a flat "data" list needs integer "rows" and "cols"') from exc
        flat = values
    if "rows" in data and "cols" in data and (int(data["rows"]), int(data["cols"])) != (rows, cols):
        raise MalformedInputError(f'"rows"/"cols" do not match the data shape {rows}x{cols}')
    if len(flat) != rows * cols:
        raise MalformedInputError(f"expected {rows * cols} entries, found {len(flat)}")
    try:
        arr = np.array(flat, dtype=np.float64).reshape(rows, cols)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"non-numeric entry: {exc}") from exc
    return as_matrix(arr)


def _parse_text_matrix(text: str) -> DenseMatrix:
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        row: list[float] = []
        column = 1
        for token in line.replace(",", " ").split():
            column = line.index(token, column - 1) + 1
            try:
                row.append(float(token))
            except ValueError:
                raise MalformedInputError(
                    f"not a number: {token!r}", line=lineno, column=column
                ) from None
            column += len(token)
        if rows and len(row) != len(rows[0]):
            raise MalformedInputError(
                f"ragged row: expected {len(rows[0])} entries, found {len(row)}", line=lineno
            )
        rows.append(row)
    if not rows:
        raise MalformedInputError("matrix text is empty", line=1, column=1)
    return as_matrix(rows)


def loads_matrix(text: str) -> DenseMatrix:
    """Parse matrix JSON, or whitespace-separated rows of numbers."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(exc.msg, line=exc.lineno, column=exc.colno) from exc
        return matrix_from_json(data)
    return _parse_text_matrix(text)


def load_matrix(path: str | Path) -> DenseMatrix:
    return loads_matrix(Path(path).read_text(encoding="utf-8"))


def load_pattern(path: str | Path) -> Pattern:
    return loads_pattern(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def certificate_report(cert: SsvpCertificate) -> dict[str, Any]:
    report: dict[str, Any] = {
        "verdict": cert.verdict,
        "rank": cert.rank,
        "column_count": cert.column_count,
        "exact": cert.exact,
    }
    if cert.relative_to is not None:
        report["relative_to"] = serialize_pattern(cert.relative_to).splitlines()
    if cert.pivot_rows is not None:
        report["pivot_rows"] = [r + 1 for r in cert.pivot_rows]
    if cert.Y is not None:
        report["Y"] = matrix_to_json(cert.Y)
        report["residuals"] = list(cert.residuals or ())
    return report


def verdict_report(verdict: ClosedFormVerdict) -> dict[str, Any]:
    report: dict[str, Any] = {
        "verdict": verdict.verdict,
        "rule": verdict.rule,
        "rule_name": verdict.rule_name,
        "detail": verdict.detail,
    }
    if verdict.certificate is not None:
        report["Y"] = matrix_to_json(verdict.certificate)
    return report


def result_report(result: RealizationResult) -> dict[str, Any]:
    report: dict[str, Any] = {
        "method": result.method,
        "matrix": matrix_to_json(result.matrix),
        "achieved_sigmas": list(result.achieved_sigmas.values),
        "requested_sigmas": list(result.requested_sigmas.values),
        "sigma_error": result.sigma_error,
        "pattern_ok": result.pattern_ok,
        "iterations": result.iterations,
        "residual": result.residual,
        "factor_defect": result.factor_defect,
        "ssvp": result.ssvp,
    }
    if result.target_pattern is not None:
        report["pattern"] = serialize_pattern(result.target_pattern).splitlines()
    if result.notes:
        report["notes"] = list(result.notes)
    return report


def failure_report(verdict: str, reason: str) -> dict[str, Any]:
    return {"verdict": verdict, "reason": reason}


def dumps_report(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2) + "\n"
