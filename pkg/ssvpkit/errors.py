"""
Exception hierarchy for ssvpkit.

Library code raises these; only the CLI turns them into exit codes.
"""

from __future__ import annotations

from typing import Any, Sequence


class SsvpkitError(Exception):
    """Base class for every error raised by ssvpkit."""


class InvalidInputError(SsvpkitError, ValueError):
    """Raised when an argument violates an operation's preconditions."""


class MalformedInputError(InvalidInputError):
    """Raised when a matrix or pattern file cannot be parsed."""

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            location = f"line {line}" if column is None else f"line {line}, column {column}"
            message = f"{location}: {message}"
        super().__init__(message)


class NotASuperpatternError(InvalidInputError):
    """Raised when a pattern does not contain the pattern of the given matrix."""


class DegenerateSpectrumError(InvalidInputError):
    """Raised when a Jacobi reconstruction is asked for repeated eigenvalues."""


class NotInTangentSpaceError(InvalidInputError):
    """Raised when a liberation direction is not of the form KA + AL."""


class NumericalBreakdownError(SsvpkitError, ArithmeticError):
    """Raised when an iteration loses the nonzero quantity it divides by."""


class AmbiguousPatternError(SsvpkitError, ValueError):
    """Raised when entries are too small to call nonzero and too large to call zero."""

    def __init__(self, positions: Sequence[tuple[int, int]]):
        self.positions = [tuple(p) for p in positions]
        shown = ", ".join(f"({i}, {j})" for i, j in self.positions[:8])
        more = "" if len(self.positions) <= 8 else f" and {len(self.positions) - 8} more"
        super().__init__(f"Entries in the ambiguity band at {shown}{more}")


class BorderlineRankError(SsvpkitError):
    """Raised when a numerical rank decision is too close to call."""

    def __init__(self, ratio: float):
        self.ratio = ratio
        super().__init__(
            f"Numerical rank is borderline (singular value ratio {ratio:.3g}); "
            "rerun in exact mode with rational entries"
        )


class InfeasibleError(SsvpkitError):
    """Raised when the requested object does not exist or this routine cannot build it."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class SsvpRequiredError(SsvpkitError):
    """Raised when a solver needs the SSVP (plain or relative) and the input lacks it."""

    def __init__(self, message: str, certificate: Any = None, *, relative: bool = False):
        self.certificate = certificate
        self.relative = relative
        super().__init__(message)

    @property
    def verdict(self) -> str:
        return "ssvp-wrt-required" if self.relative else "ssvp-required"


class NoConvergenceError(SsvpkitError):
    """Raised when a solver stops without meeting its residual tolerance."""

    def __init__(self, message: str, *, best_residual: float, iterations: int):
        self.best_residual = best_residual
        self.iterations = iterations
        super().__init__(
            f"{message} (best residual {best_residual:.3e} after {iterations} iterations)"
        )


class TargetTooFarError(NoConvergenceError):
    """Raised when bifurcation fails even after staging through intermediate lists."""
