from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest
from click.testing import CliRunner

from ssvpkit._version import __version__
from ssvpkit.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, main, run


@pytest.fixture(autouse=True)
def _isolated(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("SSVPKIT_SEED", raising=False)


def _file(tmp_path: Path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _run(argv: list[str], capsys: pytest.CaptureFixture[str]) -> tuple[int, Any, str]:
    code = run(argv)
    captured = capsys.readouterr()
    report = json.loads(captured.out) if captured.out.strip() else None
    return code, report, captured.err


EXAMPLE_A = "1 1 0 0\n0 1 1 0\n0 0 1 1\n"
EXAMPLE_B = "1 1 0 0\n0 1 1 0\n0 0 0 0\n"


def test_help_and_version() -> None:
    runner = CliRunner()
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for verb in ("check", "realize", "superpattern", "bifurcate", "liberate", "tangent"):
        assert verb in result.output
    version = runner.invoke(main, ["--version"])
    assert version.exit_code == 0
    assert __version__ in version.output


def test_check_reports_one_based_pivot_rows(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    code, report, _ = _run(["check", "--matrix", _file(tmp_path, "a.txt", EXAMPLE_A)], capsys)
    assert code == EXIT_OK
    assert report["verdict"] == "has-SSVP"
    assert report["pivot_rows"] == [1, 2, 3, 4, 5, 7]


def test_check_negative_verdict_exits_with_two(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    argv = ["check", "--exact", "--matrix", _file(tmp_path, "b.txt", EXAMPLE_B)]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_NEGATIVE
    assert report["verdict"] == "lacks-SSVP"
    assert report["exact"] is True
    assert report["Y"]["rows"] == 3
    assert "certificate" not in report


def test_check_relative_to_a_superpattern(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    argv = [
        "check",
        "--matrix",
        _file(tmp_path, "i2.txt", "1 0\n0 1\n"),
        "--pattern",
        _file(tmp_path, "s.txt", "11\n01\n"),
    ]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_OK
    assert report["relative_to"] == ["11", "01"]


def test_certify_accepts_a_valid_certificate(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    argv = [
        "certify",
        "--matrix",
        _file(tmp_path, "b.txt", EXAMPLE_B),
        "--certificate",
        _file(tmp_path, "y.txt", "0 0 0 0\n0 0 0 0\n1 -1 1 0\n"),
    ]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_OK
    assert report == {"verdict": "valid", "residuals": [0.0, 0.0, 0.0]}


def test_classify_reports_the_rule(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["classify", "--matrix", _file(tmp_path, "m.txt", "1 2 0\n0 0 0\n")]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_NEGATIVE
    assert report["Y"]["cols"] == 3
    assert (report["verdict"], report["rule"]) == ("lacks-SSVP", "R2")


def test_term_rank_command(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["term-rank", "--pattern", _file(tmp_path, "p.txt", "110\n100\n100\n")]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_OK
    assert report["term_rank"] == 2
    assert len(report["matching"]) == 2


def test_realize_path(capsys: pytest.CaptureFixture[str]) -> None:
    code, report, _ = _run(["realize", "--family", "path", "--sigmas", "3,2,1"], capsys)
    assert code == EXIT_OK
    assert (report["matrix"]["rows"], report["matrix"]["cols"]) == (3, 4)
    assert report["pattern_ok"] is True
    assert report["sigma_error"] <= 1e-10


def test_realize_reorders_sigmas_with_a_warning(capsys: pytest.CaptureFixture[str]) -> None:
    code, report, err = _run(["realize", "--family", "path", "--sigmas", "1,3,2"], capsys)
    assert code == EXIT_OK
    assert report["requested_sigmas"] == [3.0, 2.0, 1.0]
    assert "reordered" in err


def test_realize_infeasible_c6(capsys: pytest.CaptureFixture[str]) -> None:
    code, report, _ = _run(["realize", "--family", "c6", "--sigmas", "1,1,1"], capsys)
    assert code == EXIT_NEGATIVE
    assert report == {"verdict": "infeasible", "reason": "sigma1 == sigma3"}


def test_realize_distinct_needs_a_pattern(capsys: pytest.CaptureFixture[str]) -> None:
    code, _, err = _run(["realize", "--family", "distinct", "--sigmas", "2,1"], capsys)
    assert code == EXIT_ERROR
    assert "--pattern" in err


def test_tangent_command(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["tangent", "--matrix", _file(tmp_path, "i3.txt", "1 0 0\n0 1 0\n0 0 1\n")]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_OK
    assert report == {"dimension": 3, "ssvp_via_tangent": False}


def test_superpattern_without_the_ssvp(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    argv = [
        "superpattern",
        "--matrix",
        _file(tmp_path, "i2.txt", "1 0\n0 1\n"),
        "--pattern",
        _file(tmp_path, "s.txt", "11\n01\n"),
    ]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_NEGATIVE
    assert report["verdict"] == "ssvp-required"


def test_liberate_needs_exactly_one_of_direction_and_wanted(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    matrix = _file(tmp_path, "i2.txt", "1 0\n0 1\n")
    code, _, err = _run(["liberate", "--matrix", matrix], capsys)
    assert code == EXIT_ERROR
    assert "exactly one" in err


def test_liberate_with_a_direction(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    argv = [
        "liberate",
        "--matrix",
        _file(tmp_path, "i2.txt", "1 0\n0 1\n"),
        "--direction",
        _file(tmp_path, "d.txt", "0 1\n-1 0\n"),
    ]
    code, report, _ = _run(argv, capsys)
    assert code == EXIT_OK
    assert report["pattern"] == ["11", "11"]


def test_malformed_matrix_reports_line_and_column(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    code, report, err = _run(["check", "--matrix", _file(tmp_path, "m.txt", "1 2\n3 x\n")], capsys)
    assert code == EXIT_ERROR
    assert report is None
    assert "line 2, column 3" in err


def test_missing_file_is_a_usage_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code, _, _ = _run(["check", "--matrix", str(tmp_path / "nope.txt")], capsys)
    assert code == EXIT_ERROR
