import json

import pytest

from nullgeo.report_generator import ReportGenerator, VerificationReport, stable_view
from nullgeo.suites.base import IdentityResult


def sample_report():
    report = VerificationReport("null_hyperplane_conformal", "f" * 64)
    report.set_settings(["weyl"], 7, 27, 20, {"curvature": 1e-4})
    report.add_results([
        IdentityResult("eq26", "weyl", "Weyl connection is metric", "derivative",
                       1e-6, 3e-11, 1e-11, 47, "pass", name="weyl_metricity"),
        IdentityResult("eq40", "weyl", "closed form of the curvature", "curvature",
                       1e-4, 0.21, 0.1, 47, "fail", alternate_residual=2e-6, name="curvature_closed_form"),
        IdentityResult("eq74", "foliation", "leaf relation", "transfer",
                       1e-3, 0.0, 0.0, 0, "skipped", skipped_reason="untested: mixed norms",
                       name="leaf_gauduchon_relation"),
        IdentityResult("radical_kernel", "hypersurface", "xi spans the kernel", "algebraic",
                       1e-8, 0.0, 0.0, 47, "pass"),
    ])
    report.add_finding("eq40", "alternate reading passes")
    report.exit_code = 1
    return report


def test_summary_counts():
    assert sample_report().summary == {"passed": 2, "failed": 1, "skipped": 1, "exit_code": 1}


def test_json_report_schema():
    data = json.loads(ReportGenerator().generate_json(sample_report()))
    assert data["schema"] == 1
    assert data["tool"] == "nullgeo"
    assert data["spec"]["id"] == "null_hyperplane_conformal"
    assert [e["id"] for e in data["identities"]] == ["eq26", "eq40", "eq74", "radical_kernel"]
    assert [e["name"] for e in data["identities"]] == [
        "weyl_metricity", "curvature_closed_form", "leaf_gauduchon_relation", "radical_kernel"]
    assert data["identities"][1]["alternate_residual"] == 2e-6
    assert "alternate_residual" not in data["identities"][0]
    assert data["identities"][2]["skipped_reason"] == "untested: mixed norms"
    assert data["findings"] == [{"id": "eq40", "message": "alternate reading passes"}]


def test_stable_view_ignores_timestamps():
    first = sample_report()
    second = sample_report()
    second.generated = "2000-01-01T00:00:00"
    second.elapsed_seconds = 12.5
    assert stable_view(first.to_dict()) == stable_view(second.to_dict())
    assert "generated" not in stable_view(first.to_dict())


def test_markdown_report_sections():
    text = ReportGenerator().generate_markdown(sample_report())
    assert "# Lightlike Geometry Verification Report" in text
    assert "| `eq40` | curvature_closed_form | weyl | curvature | 2.10e-01 |" in text
    assert "| `radical_kernel` | radical_kernel | hypersurface |" in text
    assert "## Skipped" in text
    assert "## Findings" in text
    assert "- **Exit code:** 1" in text


def test_format_inferred_from_suffix(tmp_path):
    generator = ReportGenerator()
    written = generator.save_report(sample_report(), str(tmp_path / "out" / "report.json"))
    assert json.loads(written.read_text())["summary"]["failed"] == 1
    md = generator.save_report(sample_report(), str(tmp_path / "report.md"))
    assert md.read_text().startswith("# Lightlike")
    forced = generator.save_report(sample_report(), str(tmp_path / "report.txt"), format="json")
    assert json.loads(forced.read_text())["schema"] == 1


def test_unknown_suffix_rejected(tmp_path):
    with pytest.raises(ValueError, match="Cannot infer report format"):
        ReportGenerator().save_report(sample_report(), str(tmp_path / "report.txt"))
