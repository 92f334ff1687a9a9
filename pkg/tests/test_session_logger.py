from nullgeo.session_logger import RunLogger
from nullgeo.suites.base import IdentityResult


def make_result(verdict="pass", skipped_reason=None):
    return IdentityResult(
        identity_id="ambient_metricity", suite="hypersurface", description="metricity",
        tier="derivative", tolerance=1e-6, max_residual=2e-12, mean_residual=1e-12,
        samples=47, verdict=verdict, skipped_reason=skipped_reason,
    )


def test_run_log_records_events_in_order(log_dir):
    run_logger = RunLogger(str(log_dir), run_id="test")
    assert run_logger.get_log_file() == log_dir / "run_test.jsonl"

    run_logger.log_run_start("null_hyperplane", "abc123", ["hypersurface"], 7)
    run_logger.log_suite("suite_start", "hypersurface")
    run_logger.log_verdict(make_result())
    run_logger.log_finding("curvature_closed_form", "alternate reading passes")
    run_logger.log_suite("suite_end", "hypersurface", {"pass": 1})
    run_logger.log_error("not_lightlike", "rank 3", {"point": [0.0, 0.0, 0.0]})

    entries = run_logger.read_run_log()
    assert [e["event_type"] for e in entries] == [
        "run_start", "suite_start", "verdict", "finding", "suite_end", "error"]
    assert all(e["run_id"] == "test" for e in entries)
    assert entries[0]["seed"] == 7
    assert entries[2]["identity_id"] == "ambient_metricity"
    assert entries[2]["skipped_reason"] is None
    assert entries[4]["summary"] == {"pass": 1}
    assert entries[5]["context"] == {"point": [0.0, 0.0, 0.0]}


def test_skipped_verdict_keeps_reason(log_dir):
    run_logger = RunLogger(str(log_dir), run_id="skip")
    run_logger.log_verdict(make_result("skipped", "untested: mixed norms"))
    (entry,) = run_logger.read_run_log()
    assert entry["verdict"] == "skipped"
    assert entry["skipped_reason"] == "untested: mixed norms"


def test_missing_log_reads_empty(log_dir):
    assert RunLogger(str(log_dir), run_id="empty").read_run_log() == []
