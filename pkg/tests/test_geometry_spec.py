import copy
import json
from pathlib import Path

import pytest

from nullgeo.error_handler import ExpressionSyntaxError, SpecSchemaError
from nullgeo.geometry_spec import (
    FIXTURES_DIR,
    SpecLoader,
    default_rescalings,
    fixture_note,
    list_fixture_specs,
    load_spec,
    resolve_spec_path,
)


TEST_FIXTURES = Path(__file__).parent / "fixtures"

BUILTIN_IDS = [
    "kaehler_6d",
    "kaehler_flat",
    "kaehler_flat_closed",
    "kaehler_flat_generic",
    "light_cone",
    "null_hyperplane",
    "null_hyperplane_conformal",
    "null_hyperplane_rescaled",
    "null_hyperplane_umbilical",
    "spacelike",
]


@pytest.fixture
def hyperplane_doc():
    with open(FIXTURES_DIR / "null_hyperplane.json", encoding="utf-8") as f:
        return json.load(f)


def test_builtin_fixtures_load():
    specs = list_fixture_specs()
    assert [s.spec_id for s in specs] == BUILTIN_IDS
    for spec in specs:
        assert spec.chart_dim == spec.ambient_dim - 1
        assert len(spec.ranges) == spec.chart_dim


def test_resolve_by_name_and_relative_path():
    assert resolve_spec_path("light_cone") == FIXTURES_DIR / "light_cone.json"
    assert resolve_spec_path("fixtures/light_cone.json") == FIXTURES_DIR / "light_cone.json"
    missing = resolve_spec_path("no_such_spec")
    assert not missing.exists()


def test_missing_spec_is_schema_error():
    with pytest.raises(SpecSchemaError, match="Spec file not found"):
        load_spec("no_such_spec")


def test_dimension_mismatch():
    with pytest.raises(SpecSchemaError, match="Dimension mismatch: chart_dim = 2"):
        load_spec(TEST_FIXTURES / "bad_dimension.json")


def test_bad_expression_reports_offset():
    with pytest.raises(ExpressionSyntaxError) as info:
        load_spec(TEST_FIXTURES / "bad_expression.json")
    assert info.value.offset == 4


def test_fingerprint_is_stable(hyperplane_doc):
    loader = SpecLoader()
    first = loader.from_dict(hyperplane_doc)
    reordered = dict(reversed(list(copy.deepcopy(hyperplane_doc).items())))
    assert loader.from_dict(reordered).fingerprint == first.fingerprint
    changed = copy.deepcopy(hyperplane_doc)
    changed["grid"]["seed"] = 99
    assert loader.from_dict(changed).fingerprint != first.fingerprint


def test_invalid_tolerance_key(hyperplane_doc):
    hyperplane_doc["tolerances"] = {"loose": 1e-3}
    with pytest.raises(SpecSchemaError, match="Invalid tolerance key: loose"):
        SpecLoader().from_dict(hyperplane_doc)


def test_non_positive_tolerance(hyperplane_doc):
    hyperplane_doc["tolerances"] = {"curvature": 0}
    with pytest.raises(SpecSchemaError, match="positive"):
        SpecLoader().from_dict(hyperplane_doc)


def test_invalid_suite(hyperplane_doc):
    hyperplane_doc["suites"] = ["hypersurface", "ricci"]
    with pytest.raises(SpecSchemaError, match="Invalid suite: ricci"):
        SpecLoader().from_dict(hyperplane_doc)


def test_missing_grid(hyperplane_doc):
    del hyperplane_doc["grid"]
    with pytest.raises(SpecSchemaError, match="spec.grid"):
        SpecLoader().from_dict(hyperplane_doc)


def test_reversed_range(hyperplane_doc):
    hyperplane_doc["grid"]["ranges"][0] = [1.0, -1.0]
    with pytest.raises(SpecSchemaError, match="low <= high"):
        SpecLoader().from_dict(hyperplane_doc)


def test_complex_structure_needs_even_dimension():
    identity = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
    doc = {
        "ambient": {"dim": 3, "index": 0, "metric": identity, "complex_structure": identity},
        "hypersurface": {"chart_dim": 2, "embedding": ["x0", "x1", "0"]},
        "grid": {"ranges": [[0, 1], [0, 1]]},
    }
    with pytest.raises(SpecSchemaError, match="even ambient dimension"):
        SpecLoader().from_dict(doc)


def test_fixture_notes():
    assert fixture_note(load_spec("kaehler_6d")) == "D0 rank 2"
    assert fixture_note(load_spec("spacelike")) == "negative: not lightlike"
    assert "weyl data" in fixture_note(load_spec("null_hyperplane_conformal"))


def test_default_rescalings_are_derived_from_f():
    spec = load_spec("null_hyperplane_conformal")
    point = [0.1, 0.3, -0.2]
    value = spec.f.evaluate(point)
    derived = [g.evaluate(point) for g in default_rescalings(spec.f)]
    assert derived == pytest.approx([-value, 0.5 * value, value * value])
