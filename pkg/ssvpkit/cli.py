"""
ssvpkit CLI.

Commands:
    ssvpkit check         Decide the SSVP (optionally relative to a superpattern)
    ssvpkit certify       Validate a lacks-SSVP certificate
    ssvpkit classify      Apply the closed-form characterizations
    ssvpkit term-rank     Term rank and a maximum matching of a pattern
    ssvpkit realize       Build a matrix for one of the solved pattern families
    ssvpkit superpattern  Move a matrix with the SSVP to a superpattern
    ssvpkit bifurcate     Move the singular values of a matrix with the SSVP
    ssvpkit liberate      Free zero entries along a tangent direction
    ssvpkit tangent       Dimension of the tangent space and the SSVP via tangents

Exit codes: 0 on success, 2 on a negative or infeasible verdict, 1 on errors.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import click
from dotenv import load_dotenv

from ssvpkit._version import __version__
from ssvpkit.classify import classify_ssvp
from ssvpkit.config import SolverConfig
from ssvpkit.errors import InfeasibleError, SsvpkitError, SsvpRequiredError
from ssvpkit.flow import (
    bifurcate,
    liberate,
    liberation_direction,
    ssvp_via_tangent,
    superpattern_realize,
    tangent_basis,
)
from ssvpkit.numerics import SigmaList
from ssvpkit.pattern import maximum_matching, term_rank
from ssvpkit.realize import (
    realize_all_ones_block,
    realize_c6,
    realize_cycle_with_zero,
    realize_distinct,
    realize_orthonormal_scaled,
    realize_path,
)
from ssvpkit.reports import (
    certificate_report,
    dumps_report,
    failure_report,
    load_matrix,
    load_pattern,
    result_report,
    verdict_report,
)
from ssvpkit.types import RealizationResult
from ssvpkit.verify import LACKS_SSVP, check_ssvp, check_ssvp_wrt, validate_certificate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

FAMILIES = ("path", "c6", "distinct", "cycle", "ortho", "all-ones")

_PATH = click.Path(exists=True, dir_okay=False, path_type=Path)


class _NegativeVerdict(Exception):
    """Carries a report whose verdict is negative (exit code 2)."""

    def __init__(self, report: dict[str, Any]):
        self.report = report
        super().__init__(report.get("verdict"))


def _configure_logging() -> None:
    level = os.environ.get("SSVPKIT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _parse_sigmas(raw: str) -> SigmaList:
    """Parse comma-separated decimals; reorder to non-increasing with a warning."""
    try:
        values = [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"not a comma-separated list of numbers: {raw!r}") from exc
    if not values:
        raise click.BadParameter("no values given")
    ordered = sorted(values, reverse=True)
    if ordered != values:
        logger.warning("[cli] sigma list reordered to non-increasing: %s", ordered)
        click.echo(f"warning: sigma list reordered to {ordered}", err=True)
    return SigmaList(tuple(ordered))


def _tracer(enabled: bool) -> Callable[[dict[str, float]], None] | None:
    if not enabled:
        return None

    def emit(record: dict[str, float]) -> None:
        click.echo(json.dumps(record), err=True)

    return emit


def _emit(report: dict[str, Any]) -> None:
    click.echo(dumps_report(report), nl=False)


def _emit_result(result: RealizationResult) -> None:
    _emit(result_report(result))


def _require(value: object, flag: str, verb: str) -> None:
    if value is None:
        raise click.UsageError(f"{verb} needs {flag}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@click.group()
@click.version_option(version=__version__, prog_name="ssvpkit")
def main() -> None:
    """ssvpkit: the strong spectral property for singular values."""
    load_dotenv(Path.cwd() / ".env")
    _configure_logging()


@main.command()
@click.option("--matrix", "matrix_path", type=_PATH, required=True, help="Matrix JSON or text file")
@click.option(
    "--pattern", "pattern_path", type=_PATH, default=None, help="Superpattern to check against"
)
@click.option(
    "--exact", is_flag=True, help="Decide with rational arithmetic when entries are rational"
)
def check(matrix_path: Path, pattern_path: Path | None, exact: bool) -> None:
    """Decide whether a matrix has the SSVP."""
    a = load_matrix(matrix_path)
    mode = "exact-when-rational" if exact else "numeric"
    if pattern_path is None:
        cert = check_ssvp(a, mode=mode)
    else:
        cert = check_ssvp_wrt(a, load_pattern(pattern_path), mode=mode)
    report = certificate_report(cert)
    if cert.verdict == LACKS_SSVP:
        raise _NegativeVerdict(report)
    _emit(report)


@main.command()
@click.option("--matrix", "matrix_path", type=_PATH, required=True, help="Matrix A")
@click.option("--certificate", "certificate_path", type=_PATH, required=True, help="Certificate Y")
@click.option("--pattern", "pattern_path", type=_PATH, default=None, help="Superpattern S")
def certify(matrix_path: Path, certificate_path: Path, pattern_path: Path | None) -> None:
    """Check that Y certifies the failure of the SSVP."""
    a = load_matrix(matrix_path)
    y = load_matrix(certificate_path)
    support = load_pattern(pattern_path) if pattern_path is not None else None
    outcome = validate_certificate(a, y, support)
    report = {
        "verdict": "valid" if outcome.valid else "invalid",
        "residuals": list(outcome.residuals),
    }
    if not outcome.valid:
        raise _NegativeVerdict(report)
    _emit(report)


@main.command()
@click.option("--matrix", "matrix_path", type=_PATH, required=True, help="Matrix JSON or text file")
def classify(matrix_path: Path) -> None:
    """Apply the closed-form SSVP characterizations."""
    verdict = classify_ssvp(load_matrix(matrix_path))
    report = verdict_report(verdict)
    if verdict.verdict == LACKS_SSVP:
        raise _NegativeVerdict(report)
    _emit(report)


@main.command("term-rank")
@click.option(
    "--pattern", "pattern_path", type=_PATH, required=True, help="Pattern text or JSON file"
)
def term_rank_cmd(pattern_path: Path) -> None:
    """Term rank of a pattern, with a maximum matching."""
    pattern = load_pattern(pattern_path)
    matching = maximum_matching(pattern)
    _emit({"term_rank": term_rank(pattern), "matching": [[i + 1, j + 1] for i, j in matching]})


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), required=True, help="Pattern family")
@click.option("--sigmas", required=True, help="Comma-separated singular values")
@click.option(
    "--pattern", "pattern_path", type=_PATH, default=None, help="Pattern (distinct, all-ones)"
)
@click.option("--matrix", "matrix_path", type=_PATH, default=None, help="Row-orthonormal Q (ortho)")
@click.option("--config", "config_path", type=_PATH, default=None, help="SolverConfig JSON file")
def realize(
    family: str,
    sigmas: str,
    pattern_path: Path | None,
    matrix_path: Path | None,
    config_path: Path | None,
) -> None:
    """Realize a singular value list on a solved pattern family."""
    values = _parse_sigmas(sigmas)
    cfg = SolverConfig.resolve(config_path)
    logger.info("[cli] realize family=%s sigmas=%s", family, values)
    if family == "path":
        result = realize_path(values)
    elif family == "c6":
        result = realize_c6(values, cfg)
    elif family == "cycle":
        result = realize_cycle_with_zero(len(values), values, cfg)
    elif family == "ortho":
        _require(matrix_path, "--matrix", "realize --family ortho")
        result = realize_orthonormal_scaled(load_matrix(matrix_path), values)
    else:
        _require(pattern_path, "--pattern", f"realize --family {family}")
        pattern = load_pattern(pattern_path)
        if family == "distinct":
            result = realize_distinct(pattern, values, cfg)
        else:
            result = realize_all_ones_block(pattern, values)
    _emit_result(result)


@main.command()
@click.option("--matrix", "matrix_path", type=_PATH, required=True, help="Matrix with the SSVP")
@click.option("--pattern", "pattern_path", type=_PATH, required=True, help="Target superpattern")
@click.option("--config", "config_path", type=_PATH, default=None, help="SolverConfig JSON file")
@click.option("--trace", is_flag=True, help="Write solver iterations to stderr as JSON lines")
def superpattern(
    matrix_path: Path, pattern_path: Path, config_path: Path | None, trace: bool
) -> None:
    """Realize the singular values of a matrix on a superpattern of its pattern."""
    result = superpattern_realize(
        load_matrix(matrix_path),
        load_pattern(pattern_path),
        SolverConfig.resolve(config_path),
        _tracer(trace),
    )
    _emit_result(result)


@main.command("bifurcate")
@click.option("--matrix", "matrix_path", type=_PATH, required=True, help="Matrix with the SSVP")
@click.option("--sigmas", required=True, help="Comma-separated target singular values")
@click.option("--config", "config_path", type=_PATH, default=None, help="SolverConfig JSON file")
@click.option("--trace", is_flag=True, help="Write solver iterations to stderr as JSON lines")
def bifurcate_cmd(matrix_path: Path, sigmas: str, config_path: Path | None, trace: bool) -> None:
    """Move the singular values of a matrix while keeping its pattern."""
    result = bifurcate(
        load_matrix(matrix_path),
        _parse_sigmas(sigmas),
        SolverConfig.resolve(config_path),
        _tracer(trace),
    )
    _emit_result(result)


@main.command("liberate")
@click.option("--matrix", "matrix_path", type=_PATH, required=True, help="Matrix A")
@click.option("--direction", "direction_path", type=_PATH, default=None, help="Tangent direction D")
@click.option("--wanted", "wanted_path", type=_PATH, default=None, help="Zero positions to free")
@click.option("--config", "config_path", type=_PATH, default=None, help="SolverConfig JSON file")
@click.option("--trace", is_flag=True, help="Write solver iterations to stderr as JSON lines")
def liberate_cmd(
    matrix_path: Path,
    direction_path: Path | None,
    wanted_path: Path | None,
    config_path: Path | None,
    trace: bool,
) -> None:
    """Free zero entries of a matrix without changing its singular values."""
    if (direction_path is None) == (wanted_path is None):
        raise click.UsageError("liberate needs exactly one of --direction and --wanted")
    a = load_matrix(matrix_path)
    cfg = SolverConfig.resolve(config_path)
    if direction_path is not None:
        d = load_matrix(direction_path)
    else:
        assert wanted_path is not None
        d = liberation_direction(a, load_pattern(wanted_path), cfg)
    _emit_result(liberate(a, d, cfg, _tracer(trace)))


@main.command()
@click.option("--matrix", "matrix_path", type=_PATH, required=True, help="Matrix JSON or text file")
def tangent(matrix_path: Path) -> None:
    """Tangent space dimension and the SSVP decided through it."""
    a = load_matrix(matrix_path)
    space = tangent_basis(a)
    _emit({"dimension": space.dimension, "ssvp_via_tangent": ssvp_via_tangent(a)})


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI on ``argv`` and return the exit code instead of exiting."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        rv = main.main(args=args, prog_name="ssvpkit", standalone_mode=False)
    except _NegativeVerdict as neg:
        _emit(neg.report)
        return EXIT_NEGATIVE
    except InfeasibleError as exc:
        _emit(failure_report("infeasible", exc.reason))
        return EXIT_NEGATIVE
    except SsvpRequiredError as exc:
        _emit(failure_report(exc.verdict, str(exc)))
        return EXIT_NEGATIVE
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_ERROR
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    except (SsvpkitError, OSError) as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_ERROR
    return rv if isinstance(rv, int) else EXIT_OK


def entrypoint() -> None:
    sys.exit(run())
