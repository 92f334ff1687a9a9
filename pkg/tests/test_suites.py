import dataclasses
import json
from pathlib import Path

import pytest

from config.config_loader import load_config
from nullgeo.cli import run_verification, select_suites
from nullgeo.error_handler import NotLightlikeError
from nullgeo.geometry_spec import FIXTURES_DIR, load_spec
from nullgeo.report_generator import stable_view
from nullgeo.sampling import build_grid
from nullgeo.suites import SUITES


def verify(spec_id, suites=None, per_axis=2, count=2, config=None, overrides=None):
    spec = load_spec(spec_id)
    grid = build_grid(spec.ranges, per_axis, count, 7)
    return run_verification(spec, config or load_config(), suites or select_suites(spec, "all"),
                            grid, overrides)


def by_name(report):
    return {entry["name"]: entry for entry in report.identities}


def test_suite_table_order():
    assert list(SUITES) == ["hypersurface", "degcalc", "weyl", "foliation", "kaehler"]


def test_null_hyperplane_hypersurface_and_degcalc_pass():
    report = verify("null_hyperplane", ["hypersurface", "degcalc"])
    assert report.exit_code == 0
    assert report.count("fail") == 0
    assert len(report.identities) == 21
    assert by_name(report)["ambient_holonomy"]["details"]["points"] == 4
    assert by_name(report)["normalization_pair"]["details"]["within_solver_tolerance"] is True
    assert all(entry["samples"] > 0 for entry in report.identities)


def test_light_cone_fails_totally_geodesic_only():
    report = verify("light_cone")
    entries = by_name(report)
    assert entries["totally_geodesic"]["verdict"] == "fail"
    assert entries["totally_geodesic"]["details"]["max_B"] > 1e-2
    assert entries["screen_integrability"]["verdict"] == "pass"
    assert entries["dual_pairing"]["verdict"] == "pass"
    assert report.exit_code == 1
    assert report.metadata["negative_fixture"] == "not totally geodesic"


def test_spacelike_precondition_raises():
    with pytest.raises(NotLightlikeError):
        verify("spacelike")


def test_radical_dependent_factor_aborts_weyl_suite():
    report = verify(str(Path(__file__).parent / "fixtures" / "non_horizontal_factor.json"))
    assert report.exit_code == 3
    assert report.count("skipped") == len(report.identities)
    assert all("suite aborted" in entry["skipped_reason"] for entry in report.identities)
    assert any("conformal_factor" in finding["message"] for finding in report.findings)


def test_threaded_run_matches_serial():
    config = load_config()
    threaded = dataclasses.replace(config, execution=dataclasses.replace(config.execution, workers=3))
    serial = verify("light_cone", ["hypersurface"], config=config)
    parallel = verify("light_cone", ["hypersurface"], config=threaded)
    assert stable_view(serial.to_dict()) == stable_view(parallel.to_dict())


def test_tolerance_override_is_reported():
    report = verify("null_hyperplane", ["degcalc"], overrides={"curvature": 5e-3})
    assert report.settings["tolerances"]["curvature"] == 5e-3


@pytest.mark.slow
def test_conformal_fixture_records_misprints():
    report = verify("null_hyperplane_conformal")
    entries = by_name(report)
    closed_form = entries["curvature_closed_form"]
    assert closed_form["verdict"] == "fail"
    assert closed_form["alternate_residual"] <= closed_form["tolerance"]
    leaf_scalar = entries["leaf_weyl_scalar"]
    assert leaf_scalar["verdict"] == "fail"
    assert leaf_scalar["alternate_residual"] <= leaf_scalar["tolerance"]
    assert entries["leaf_gauduchon_relation"]["verdict"] == "skipped"
    assert entries["leaf_gauduchon_relation"]["skipped_reason"].startswith("untested:")
    assert entries["weyl_metricity"]["verdict"] == "pass"
    assert entries["ricci_conformal_invariance"]["verdict"] == "pass"
    assert entries["leaf_einstein_weyl"]["verdict"] == "pass"
    assert report.exit_code == 1
    assert {f["id"] for f in report.findings} >= {"eq40", "eq42", "eq70", "eq73"}


@pytest.mark.slow
@pytest.mark.parametrize("spec_id, closed", [
    ("kaehler_flat", True),
    ("kaehler_flat_closed", True),
    ("kaehler_flat_generic", False),
])
def test_closedness_criterion(spec_id, closed):
    report = verify(spec_id, ["kaehler"], per_axis=2, count=0)
    entry = by_name(report)["closedness_criterion"]
    assert entry["details"]["closed"] is closed
    assert entry["details"]["criterion_holds"] is True
    assert entry["verdict"] == "pass"


@pytest.mark.slow
def test_six_dimensional_kaehler_reports_d0_rank():
    report = verify("kaehler_6d", ["kaehler"], per_axis=1, count=2)
    entries = by_name(report)
    assert entries["isotropic_pair"]["details"]["d0_rank"] == 2
    assert entries["almost_contact"]["verdict"] == "pass"


@pytest.mark.slow
def test_rescaled_radical_field_exposes_phi_terms():
    report = verify("null_hyperplane_rescaled", ["weyl", "foliation"])
    entries = by_name(report)
    for name in ("scalar_closed_form", "umbilical_scalar", "einstein_function_transfer", "leaf_scalar_transfer"):
        assert entries[name]["verdict"] == "fail", name
        assert entries[name]["alternate_residual"] <= entries[name]["tolerance"], name
    readings = entries["leaf_scalar_transfer"]["details"]["alternates"]
    assert len(readings) == 3
    tolerance = entries["leaf_scalar_transfer"]["tolerance"]
    assert [label for label, value in readings.items() if value <= tolerance] == ["contracted Ricci closed form"]
    assert entries["leaf_weyl_scalar"]["verdict"] == "pass"
    assert entries["einstein_weyl"]["verdict"] == "pass"
    finding_ids = {f["id"] for f in report.findings}
    assert {"eq42", "eq60", "eq65", "eq73"} <= finding_ids
    assert "eq70" not in finding_ids
    assert report.metadata["foliation_members"] == ["g0"]


@pytest.mark.slow
def test_constant_factor_keeps_the_run_member_in_the_foliation_sweep(tmp_path):
    spec = json.loads((FIXTURES_DIR / "null_hyperplane_rescaled.json").read_text())
    spec["id"] = "null_hyperplane_rescaled_scaled"
    spec["conformal"] = {"f": "0.3"}
    path = tmp_path / "rescaled_scaled.json"
    path.write_text(json.dumps(spec))
    report = verify(str(path), ["foliation"])
    assert report.metadata["foliation_members"] == ["g0", "g"]
    assert "foliation_excluded" not in report.metadata
    entry = by_name(report)["umbilical_scalar"]
    assert entry["details"]["members"] == ["g0", "g"]
    assert entry["verdict"] == "fail"


@pytest.mark.slow
def test_horizontal_factor_drops_the_run_member():
    report = verify("null_hyperplane_conformal", ["foliation"])
    assert report.metadata["foliation_members"] == ["g0"]
    assert report.metadata["foliation_excluded"].startswith("g: screen is not totally umbilical")
