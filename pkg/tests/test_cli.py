import json
from pathlib import Path

import pytest

from nullgeo.cli import main, parse_arguments
from nullgeo.report_generator import stable_view
from nullgeo.ui_formatter import UIFormatter


FIXTURES = Path(__file__).parent / "fixtures"


def run_cli(log_dir, *args):
    return main(["--log-dir", str(log_dir), *args])


def test_verify_null_hyperplane_passes(log_dir, capsys):
    code = run_cli(log_dir, "verify", "--spec", "null_hyperplane", "--suite", "hypersurface", "--points", "2")
    out = capsys.readouterr().out
    assert code == 0
    for identity_id in ("eq17", "eq18", "eq19", "eq20"):
        assert f"{identity_id} " in out
    assert "thm2 totally_geodesic" in out
    assert "0 failed" in out
    assert (log_dir / "nullgeo.log").exists()
    assert list(log_dir.glob("run_*.jsonl"))


def test_spacelike_exits_with_invariant_code(log_dir, capsys):
    code = run_cli(log_dir, "verify", "--spec", "spacelike")
    err = capsys.readouterr().err
    assert code == 3
    assert "not_lightlike" in err
    assert "rank" in err
    assert "hint:" in err


def test_light_cone_exits_with_identity_failure(log_dir):
    assert run_cli(log_dir, "verify", "--spec", "light_cone", "--suite", "hypersurface", "--points", "1") == 1


def test_schema_errors_exit_two(log_dir, capsys):
    assert run_cli(log_dir, "verify", "--spec", str(FIXTURES / "bad_dimension.json")) == 2
    assert "Dimension mismatch" in capsys.readouterr().err
    assert run_cli(log_dir, "verify", "--spec", str(FIXTURES / "bad_expression.json")) == 2
    assert "offset 4" in capsys.readouterr().err
    assert run_cli(log_dir, "verify", "--spec", "no_such_spec") == 2


def test_non_horizontal_factor_exits_three(log_dir):
    assert run_cli(log_dir, "verify", "--spec", str(FIXTURES / "non_horizontal_factor.json")) == 3


def test_missing_config_exits_two(log_dir, tmp_path, capsys):
    code = main(["--config", str(tmp_path / "absent.yaml"), "--log-dir", str(log_dir), "fixtures"])
    assert code == 2
    assert "Configuration error" in capsys.readouterr().err


def test_fixtures_listing(log_dir, capsys):
    assert run_cli(log_dir, "fixtures") == 0
    out = capsys.readouterr().out
    for spec_id in ("null_hyperplane", "light_cone", "kaehler_6d", "spacelike"):
        assert spec_id in out
    assert "D0 rank 2" in out
    assert "negative: not lightlike" in out


def test_json_report_is_deterministic(log_dir, tmp_path):
    args = ["verify", "--spec", "light_cone", "--suite", "degcalc", "--points", "3", "--seed", "5"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    code = run_cli(log_dir, *args, "--report", str(first))
    assert run_cli(log_dir, *args, "--report", str(second)) == code
    a = json.loads(first.read_text())
    b = json.loads(second.read_text())
    assert a["summary"]["exit_code"] == code
    assert a["settings"]["seed"] == 5
    assert a["settings"]["random_points"] == 3
    assert stable_view(a) == stable_view(b)


def test_markdown_report_and_tolerance_override(log_dir, tmp_path):
    path = tmp_path / "report.md"
    code = run_cli(log_dir, "verify", "--spec", "null_hyperplane", "--suite", "degcalc",
                   "--points", "0", "--tol-curvature", "1e-3", "--report", str(path))
    assert code == 0
    text = path.read_text()
    assert text.startswith("# Lightlike Geometry Verification Report")
    assert "curvature 1e-03" in text


def test_unknown_suite_is_rejected():
    with pytest.raises(SystemExit):
        parse_arguments(["verify", "--spec", "null_hyperplane", "--suite", "ricci"])


def test_verdict_line_formatting():
    assert "1.00e-09 <= 1e-08" in UIFormatter.verdict_line("radical_kernel", "pass", 1e-9, 1e-8)
    failed = UIFormatter.verdict_line("thm2", "fail", 0.4, 1e-8, name="totally_geodesic")
    assert "thm2 totally_geodesic" in failed and "> " in failed
    skipped = UIFormatter.verdict_line("eq61", "skipped", 0.0, 1e-4, "not umbilical", name="leaf_ricci")
    assert "skipped" in skipped and "(not umbilical)" in skipped


@pytest.mark.slow
def test_kaehler_report_carries_closedness_entry(log_dir, tmp_path):
    path = tmp_path / "out.json"
    run_cli(log_dir, "verify", "--spec", "kaehler_flat", "--suite", "kaehler", "--points", "0",
            "--report", str(path))
    entries = {entry["id"]: entry for entry in json.loads(path.read_text())["identities"]}
    assert entries["thm4"]["name"] == "closedness_criterion"
    assert entries["thm4"]["verdict"] == "pass"
