"""
GeometrySpec Loading

Reads a GeometrySpec JSON file, validates its schema and dimensions,
parses every expression and builds the geometry objects the suites use.
Built-in specs live under nullgeo/fixtures/.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from nullgeo.ambient import AmbientManifold
from nullgeo.error_handler import SpecSchemaError
from nullgeo.exprcalc import ScalarField, parse
from nullgeo.hypersurface import Embedding, LightlikeHypersurface
from nullgeo.tensor_fields import ExpressionField


logger = logging.getLogger(__name__)


FIXTURES_DIR = Path(__file__).parent / "fixtures"

SUITE_NAMES = ['hypersurface', 'degcalc', 'weyl', 'foliation', 'kaehler']
TOLERANCE_KEYS = ['algebraic', 'derivative', 'curvature', 'transfer', 'finite_difference']


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def fingerprint(data: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON text of a spec"""
    return hashlib.sha256(canonical_json(data).encode('utf-8')).hexdigest()


def _require(block: Dict[str, Any], key: str, where: str) -> Any:
    if not isinstance(block, dict) or key not in block:
        raise SpecSchemaError(f"Missing required key: {where}.{key}")
    return block[key]


def _expression_list(values: Any, dim: int, where: str) -> List[ScalarField]:
    if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
        raise SpecSchemaError(f"{where} must be a list of expression strings")
    return [parse(text, dim) for text in values]


def _expression_matrix(values: Any, size: int, dim: int, where: str) -> List[List[ScalarField]]:
    if not isinstance(values, list) or len(values) != size:
        raise SpecSchemaError(f"{where} must be a {size}x{size} matrix")
    rows = []
    for i, row in enumerate(values):
        if not isinstance(row, list) or len(row) != size:
            raise SpecSchemaError(f"{where} row {i} must have {size} entries")
        rows.append(_expression_list(row, dim, f"{where}[{i}]"))
    return rows


@dataclass
class GeometrySpec:
    """
    Parsed and validated GeometrySpec

    Attributes:
        spec_id: Identifier ("id" key, else the file stem)
        raw: The JSON document as loaded
        ranges: Sample ranges per hypersurface chart coordinate
    """
    spec_id: str
    description: str
    raw: Dict[str, Any]
    ambient_dim: int
    index: int
    metric: List[List[ScalarField]]
    complex_structure: Optional[List[List[ScalarField]]]
    chart_dim: int
    embedding: List[ScalarField]
    xi: Optional[List[ScalarField]]
    screen: Optional[List[List[ScalarField]]]
    f: Optional[ScalarField]
    rescalings: List[ScalarField]
    theta0: Optional[List[ScalarField]]
    leaf: Optional[List[ScalarField]]
    ranges: List[List[float]]
    points_per_axis: Optional[int] = None
    seed: Optional[int] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    suites: List[str] = field(default_factory=lambda: list(SUITE_NAMES))
    negative: Optional[str] = None
    path: Optional[Path] = None

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.raw)

    @property
    def n(self) -> int:
        return self.chart_dim - 1

    @property
    def has_weyl(self) -> bool:
        return self.theta0 is not None

    @property
    def has_complex_structure(self) -> bool:
        return self.complex_structure is not None

    # -- builders --------------------------------------------------------------------

    def build_ambient(self) -> AmbientManifold:
        return AmbientManifold(self.metric, self.index, self.complex_structure)

    def build_embedding(self) -> Embedding:
        return Embedding(self.embedding)

    def xi_field(self) -> Optional[ExpressionField]:
        return ExpressionField(self.xi) if self.xi is not None else None

    def screen_fields(self) -> Optional[List[ExpressionField]]:
        if self.screen is None:
            return None
        return [ExpressionField(components) for components in self.screen]

    def theta0_field(self) -> Optional[ExpressionField]:
        return ExpressionField(self.theta0) if self.theta0 is not None else None

    def build_hypersurface(self, ambient: Optional[AmbientManifold] = None,
                           rank_tol: float = 1e-9, fd_step: float = 1e-3) -> LightlikeHypersurface:
        return LightlikeHypersurface(
            ambient or self.build_ambient(), self.build_embedding(),
            xi=self.xi_field(), screen=self.screen_fields(),
            rank_tol=rank_tol, fd_step=fd_step,
        )

    def describe_suites(self) -> str:
        return ", ".join(self.suites)


class SpecLoader:
    """Load and validate GeometrySpec documents"""

    def load(self, path) -> GeometrySpec:
        """
        Load a GeometrySpec from a JSON file

        Args:
            path: Spec file path, or a built-in fixture id

        Returns:
            GeometrySpec

        Raises:
            SpecSchemaError: Unreadable file, invalid JSON or schema violation
        """
        path = resolve_spec_path(path)
        try:
            with open(path, 'r', encoding='utf-8') as f:
                raw = json.load(f)
        except FileNotFoundError:
            raise SpecSchemaError(f"Spec file not found: {path}")
        except json.JSONDecodeError as e:
            raise SpecSchemaError(f"Invalid JSON in {path}: {e}",
                                  {"line": e.lineno, "column": e.colno})
        except UnicodeDecodeError as e:
            raise SpecSchemaError(f"Spec file is not UTF-8: {e}")
        spec = self.from_dict(raw, default_id=path.stem)
        spec.path = path
        logger.info(f"Loaded spec '{spec.spec_id}' from {path} (fingerprint {spec.fingerprint[:12]})")
        return spec

    def from_dict(self, raw: Dict[str, Any], default_id: str = "spec") -> GeometrySpec:
        """
        Validate a spec document already parsed from JSON

        Raises:
            SpecSchemaError: On any schema or dimension violation
        """
        if not isinstance(raw, dict):
            raise SpecSchemaError("Spec must be a JSON object")

        ambient = _require(raw, 'ambient', 'spec')
        ambient_dim = _require(ambient, 'dim', 'ambient')
        if not isinstance(ambient_dim, int) or ambient_dim < 3:
            raise SpecSchemaError(f"ambient.dim must be an integer >= 3, got {ambient_dim!r}")
        index = ambient.get('index', 1)
        if not isinstance(index, int) or not 0 <= index <= ambient_dim:
            raise SpecSchemaError(f"ambient.index must be an integer in [0, {ambient_dim}]")
        metric = _expression_matrix(_require(ambient, 'metric', 'ambient'),
                                    ambient_dim, ambient_dim, 'ambient.metric')
        complex_structure = None
        if ambient.get('complex_structure') is not None:
            if ambient_dim % 2:
                raise SpecSchemaError("ambient.complex_structure needs an even ambient dimension")
            complex_structure = _expression_matrix(ambient['complex_structure'], ambient_dim,
                                                   ambient_dim, 'ambient.complex_structure')

        hyper = _require(raw, 'hypersurface', 'spec')
        chart_dim = _require(hyper, 'chart_dim', 'hypersurface')
        if chart_dim != ambient_dim - 1:
            raise SpecSchemaError(
                f"Dimension mismatch: chart_dim = {chart_dim}, expected ambient.dim - 1 = {ambient_dim - 1}")
        embedding = _expression_list(_require(hyper, 'embedding', 'hypersurface'),
                                     chart_dim, 'hypersurface.embedding')
        if len(embedding) != ambient_dim:
            raise SpecSchemaError(
                f"hypersurface.embedding needs {ambient_dim} components, got {len(embedding)}")
        xi = None
        if hyper.get('xi') is not None:
            xi = _expression_list(hyper['xi'], chart_dim, 'hypersurface.xi')
            if len(xi) != chart_dim:
                raise SpecSchemaError(f"hypersurface.xi needs {chart_dim} components")
        screen = None
        if hyper.get('screen') is not None:
            if not isinstance(hyper['screen'], list) or len(hyper['screen']) != chart_dim - 1:
                raise SpecSchemaError(
                    f"hypersurface.screen needs {chart_dim - 1} fields (chart_dim - 1)")
            screen = []
            for i, components in enumerate(hyper['screen']):
                fields = _expression_list(components, chart_dim, f'hypersurface.screen[{i}]')
                if len(fields) != chart_dim:
                    raise SpecSchemaError(f"hypersurface.screen[{i}] needs {chart_dim} components")
                screen.append(fields)

        conformal = raw.get('conformal') or {}
        f = parse(conformal['f'], chart_dim) if conformal.get('f') is not None else None
        rescalings = []
        if conformal.get('rescalings') is not None:
            rescalings = _expression_list(conformal['rescalings'], chart_dim, 'conformal.rescalings')

        theta0 = None
        weyl = raw.get('weyl') or {}
        if weyl.get('theta0') is not None:
            theta0 = _expression_list(weyl['theta0'], chart_dim, 'weyl.theta0')
            if len(theta0) != chart_dim:
                raise SpecSchemaError(f"weyl.theta0 needs {chart_dim} components")

        leaf = None
        foliation = raw.get('foliation') or {}
        if foliation.get('leaf') is not None:
            leaf = _expression_list(foliation['leaf'], chart_dim - 1, 'foliation.leaf')
            if len(leaf) != chart_dim:
                raise SpecSchemaError(f"foliation.leaf needs {chart_dim} components")

        grid = _require(raw, 'grid', 'spec')
        ranges = _require(grid, 'ranges', 'grid')
        if not isinstance(ranges, list) or len(ranges) != chart_dim:
            raise SpecSchemaError(f"grid.ranges needs one [low, high] pair per chart coordinate ({chart_dim})")
        checked_ranges = []
        for i, pair in enumerate(ranges):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(v, (int, float)) for v in pair) or pair[0] > pair[1]):
                raise SpecSchemaError(f"grid.ranges[{i}] must be [low, high] with low <= high")
            checked_ranges.append([float(pair[0]), float(pair[1])])

        tolerances = {}
        for key, value in (raw.get('tolerances') or {}).items():
            if key not in TOLERANCE_KEYS:
                raise SpecSchemaError(
                    f"Invalid tolerance key: {key}. Must be one of: {', '.join(TOLERANCE_KEYS)}")
            if not isinstance(value, (int, float)) or value <= 0:
                raise SpecSchemaError(f"tolerances.{key} must be a positive number")
            tolerances[key] = float(value)

        suites = raw.get('suites', list(SUITE_NAMES))
        unknown = [s for s in suites if s not in SUITE_NAMES]
        if unknown:
            raise SpecSchemaError(
                f"Invalid suite: {unknown[0]}. Must be one of: {', '.join(SUITE_NAMES)}")

        return GeometrySpec(
            spec_id=str(raw.get('id', default_id)),
            description=str(raw.get('description', '')),
            raw=raw,
            ambient_dim=ambient_dim,
            index=index,
            metric=metric,
            complex_structure=complex_structure,
            chart_dim=chart_dim,
            embedding=embedding,
            xi=xi,
            screen=screen,
            f=f,
            rescalings=rescalings,
            theta0=theta0,
            leaf=leaf,
            ranges=checked_ranges,
            points_per_axis=grid.get('points_per_axis'),
            seed=grid.get('seed'),
            tolerances=tolerances,
            suites=list(suites),
            negative=raw.get('negative'),
        )


def resolve_spec_path(path) -> Path:
    """
    Existing paths win; otherwise "light_cone" or "fixtures/light_cone.json"
    resolve to the built-in file of that name
    """
    candidate = Path(path)
    if candidate.exists():
        return candidate
    name = candidate.name if candidate.suffix else f"{candidate.name}.json"
    builtin = FIXTURES_DIR / name
    return builtin if builtin.exists() else candidate


def load_spec(path) -> GeometrySpec:
    """Convenience wrapper around SpecLoader.load"""
    return SpecLoader().load(path)


def list_fixture_specs() -> List[GeometrySpec]:
    """All built-in fixtures, sorted by id"""
    loader = SpecLoader()
    return sorted((loader.load(p) for p in FIXTURES_DIR.glob("*.json")), key=lambda s: s.spec_id)


def fixture_note(spec: GeometrySpec) -> str:
    """Short flags shown by the fixtures listing"""
    notes: List[str] = []
    if spec.negative:
        notes.append(f"negative: {spec.negative}")
    if spec.has_complex_structure:
        notes.append(f"D0 rank {spec.ambient_dim - 4}")
    if spec.has_weyl:
        notes.append("weyl data")
    return "; ".join(notes)


def default_rescalings(f: ScalarField) -> Sequence[ScalarField]:
    """Three horizontal rescalings derived from f when a spec gives none"""
    return [-f, f * 0.5, f * f]
