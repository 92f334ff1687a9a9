"""
Identity Suite Base

Shared machinery for the verification suites: the run context with lazily
built geometry, per-identity residual statistics and the loop that turns
registry entries into verdicts.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from config.config_loader import NullGeoConfig
from nullgeo.error_handler import NullGeoError
from nullgeo.exprcalc import ScalarField
from nullgeo.geometry_spec import GeometrySpec, default_rescalings
from nullgeo.identity_registry import IdentityEntry, IdentityRegistry
from nullgeo.sampling import SampleGrid, point_rng, random_vectors
from nullgeo.tensor_fields import residual
from nullgeo.weyl import ConformalClassMember, WeylData


logger = logging.getLogger(__name__)


def vanishing(value, reference=None) -> float:
    """max |value| / (1 + max |reference|); reference defaults to value itself"""
    value = np.asarray(value, dtype=float)
    if reference is None:
        return residual(value, np.zeros_like(value))
    reference = np.asarray(reference, dtype=float)
    scale = float(np.max(np.abs(reference))) if reference.size else 0.0
    return float(np.max(np.abs(value))) / (1.0 + scale) if value.size else 0.0


def horizontal(vector: np.ndarray, eta: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """P X = X - eta(X) xi"""
    return vector - float(eta @ vector) * xi


class IdentitySkipped(Exception):
    """Raised by a check to mark its identity as skipped"""
    pass


@dataclass
class ResidualStats:
    """Residual samples of one identity"""
    values: List[float] = field(default_factory=list)

    def add(self, value: Union[float, Iterable[float]]):
        if isinstance(value, (int, float, np.floating)):
            self.values.append(float(value))
        else:
            self.values.extend(float(v) for v in value)

    @property
    def samples(self) -> int:
        return len(self.values)

    @property
    def max(self) -> float:
        return max(self.values) if self.values else 0.0

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values else 0.0


@dataclass
class IdentityRecord:
    """
    Mutable scratch space a check fills in

    Alternate readings are kept per label; the registry text labels a
    reading added without one.
    """
    entry: IdentityEntry
    stats: ResidualStats = field(default_factory=ResidualStats)
    alternates: Dict[str, ResidualStats] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    forced_verdict: Optional[str] = None

    def add(self, value):
        self.stats.add(value)

    def add_alternate(self, value, label: Optional[str] = None):
        key = label or self.entry.alternate or "alternate"
        self.alternates.setdefault(key, ResidualStats()).add(value)

    def best_alternate(self) -> Optional[Tuple[str, float]]:
        """(label, max residual) of the closest alternate reading"""
        readings = [(label, stats.max) for label, stats in self.alternates.items() if stats.samples]
        return min(readings, key=lambda reading: reading[1]) if readings else None


@dataclass
class IdentityResult:
    """Verdict of one identity"""
    identity_id: str
    suite: str
    description: str
    tier: str
    tolerance: float
    max_residual: float
    mean_residual: float
    samples: int
    verdict: str
    skipped_reason: Optional[str] = None
    alternate_residual: Optional[float] = None
    details: Optional[Dict[str, Any]] = None
    name: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "id": self.identity_id,
            "name": self.name or self.identity_id,
            "suite": self.suite,
            "description": self.description,
            "tier": self.tier,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "samples": self.samples,
            "verdict": self.verdict,
        }
        if self.skipped_reason is not None:
            data["skipped_reason"] = self.skipped_reason
        if self.alternate_residual is not None:
            data["alternate_residual"] = self.alternate_residual
        if self.details:
            data["details"] = self.details
        return data


@dataclass
class Finding:
    identity_id: str
    message: str

    def to_dict(self) -> Dict[str, str]:
        return {"id": self.identity_id, "message": self.message}


class VerificationContext:
    """
    Everything a suite needs for one run

    Geometry objects are built on first use and shared between suites.

    Args:
        spec: Loaded GeometrySpec
        config: Run defaults
        grid: Sample points on the hypersurface chart
        tolerance_overrides: CLI tolerances, highest precedence
    """

    def __init__(self, spec: GeometrySpec, config: NullGeoConfig, grid: SampleGrid,
                 tolerance_overrides: Optional[Dict[str, float]] = None):
        self.spec = spec
        self.config = config
        self.grid = grid
        self.seed = grid.seed
        self.tolerances = self._resolve_tolerances(tolerance_overrides or {})
        self.findings: List[Finding] = []
        self.metadata: Dict[str, Any] = {}
        self._built: Dict[str, Any] = {}

    def _resolve_tolerances(self, overrides: Dict[str, float]) -> Dict[str, float]:
        tiers = ['algebraic', 'derivative', 'curvature', 'transfer', 'finite_difference']
        resolved = {tier: self.config.tolerances.for_tier(tier) for tier in tiers}
        resolved.update(self.spec.tolerances)
        resolved.update({k: v for k, v in overrides.items() if v is not None})
        return resolved

    def tolerance(self, tier: str) -> float:
        return self.tolerances[tier]

    @property
    def points(self) -> List[np.ndarray]:
        return self.grid.points

    @property
    def step(self) -> float:
        return self.config.numerics.derived_fd_step

    def rng(self, identity_id: str, point_index: int) -> np.random.Generator:
        return point_rng(self.seed, point_index, identity_id)

    def vectors(self, rng: np.random.Generator, count: Optional[int] = None) -> List[np.ndarray]:
        return random_vectors(rng, self.spec.chart_dim, count or self.config.grid.random_vectors)

    def add_finding(self, identity_id: str, message: str):
        logger.warning(f"Finding for {identity_id}: {message}")
        self.findings.append(Finding(identity_id, message))

    def cached(self, name: str, build: Callable[[], Any]) -> Any:
        if name not in self._built:
            self._built[name] = build()
        return self._built[name]

    # -- shared geometry -----------------------------------------------------------------

    @property
    def ambient(self):
        return self.cached('ambient', self.spec.build_ambient)

    @property
    def hypersurface(self):
        numerics = self.config.numerics
        return self.cached('hypersurface', lambda: self.spec.build_hypersurface(
            self.ambient, rank_tol=numerics.rank_tol, fd_step=numerics.derived_fd_step))

    def ambient_points(self) -> List[np.ndarray]:
        embedding = self.hypersurface.embedding
        return [embedding.point(p) for p in self.points]

    def geodesic_status(self) -> Dict[str, Any]:
        """check_totally_geodesic over the run grid, computed once"""
        return self.cached('geodesic', lambda: self.hypersurface.check_totally_geodesic(
            self.points, self.tolerance('derivative')))

    @property
    def base_member(self) -> ConformalClassMember:
        return self.cached('g0', lambda: ConformalClassMember(self.hypersurface, None, "g0", self.step))

    @property
    def member(self) -> ConformalClassMember:
        """Member e^{-2f} g0 for the GeometrySpec's f; g0 itself when f is absent or zero"""
        f = self.spec.f
        if f is None or f.is_zero():
            return self.base_member
        return self.cached('g', lambda: ConformalClassMember(self.hypersurface, f, "g", self.step))

    @property
    def weyl(self) -> WeylData:
        return self.cached('weyl', lambda: WeylData(self.member, self.spec.theta0_field()))

    @property
    def base_weyl(self) -> WeylData:
        if self.member is self.base_member:
            return self.weyl
        return self.cached('weyl0', lambda: WeylData(self.base_member, self.spec.theta0_field()))

    def rescalings(self) -> List[ScalarField]:
        if self.spec.rescalings:
            return list(self.spec.rescalings)
        if self.spec.f is not None and not self.spec.f.is_zero():
            return list(default_rescalings(self.spec.f))
        return []

    def rescaled_weyls(self) -> List[WeylData]:
        return self.cached('rescaled', lambda: [
            self.weyl.rescaled(f_prime, f"g*exp(-2 f{i + 1})")
            for i, f_prime in enumerate(self.rescalings())
        ])


class IdentitySuite:
    """
    One suite of identities

    Subclasses implement check_<identity name>(record) for every registry
    entry of their suite and may veto the whole suite through
    skip_reason().
    """

    name: str = ""
    description: str = ""

    def __init__(self, context: VerificationContext, registry: IdentityRegistry):
        self.context = context
        self.registry = registry
        self.error: Optional[NullGeoError] = None

    def skip_reason(self) -> Optional[str]:
        """Reason to skip every identity of the suite, or None"""
        return None

    def prepare(self):
        """Check suite preconditions; may raise spec invariant errors"""
        pass

    def each_point(self, record: IdentityRecord, evaluate: Callable[[int, np.ndarray, np.random.Generator], Any],
                   points: Optional[List[np.ndarray]] = None):
        """
        Evaluate a residual function at every sample point

        evaluate(index, point, rng) returns a residual or an iterable of
        residuals. Point order is preserved when workers > 1.
        """
        selected = self.context.points if points is None else points
        tasks = [(i, p, self.context.rng(record.entry.name, i)) for i, p in enumerate(selected)]
        workers = self.context.config.execution.workers
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                outcomes = list(executor.map(lambda task: evaluate(*task), tasks))
        else:
            outcomes = [evaluate(*task) for task in tasks]
        for outcome in outcomes:
            record.add(outcome)

    def run(self) -> List[IdentityResult]:
        """
        Run every identity of the suite

        A NullGeoError raised by a check aborts the suite: the failing and
        remaining identities are reported as skipped and the error is kept
        on self.error.
        """
        entries = self.registry.for_suite(self.name)
        logger.info(f"Running suite {self.name} ({len(entries)} identities)")
        results: List[IdentityResult] = []
        suite_reason = self.skip_reason()
        if suite_reason is None:
            try:
                self.prepare()
            except NullGeoError as e:
                self.error = e
                suite_reason = f"suite aborted: {e}"
        for entry in entries:
            if suite_reason is not None:
                results.append(self._skipped(entry, suite_reason))
                continue
            if entry.untested:
                results.append(self._skipped(entry, f"untested: {entry.untested}"))
                continue
            try:
                results.append(self._run_identity(entry))
            except IdentitySkipped as e:
                results.append(self._skipped(entry, str(e)))
            except NullGeoError as e:
                logger.error(f"{entry.identity_id} aborted suite {self.name}: {e}")
                self.error = e
                suite_reason = f"suite aborted: {e}"
                results.append(self._skipped(entry, suite_reason))
        return results

    def aborted(self, error: BaseException) -> List[IdentityResult]:
        """Skipped results for every identity after an unexpected failure"""
        reason = f"suite aborted: {error}"
        return [self._skipped(entry, reason) for entry in self.registry.for_suite(self.name)]

    def evaluate_check(self, record: IdentityRecord):
        """Dispatch to check_<name>; suites that sweep several members override this"""
        getattr(self, f"check_{record.entry.name}")(record)

    def _run_identity(self, entry: IdentityEntry) -> IdentityResult:
        record = IdentityRecord(entry)
        self.evaluate_check(record)
        tolerance = self.context.tolerance(entry.tier)
        stats = record.stats
        if stats.samples == 0:
            raise IdentitySkipped("no samples")
        verdict = record.forced_verdict or ("pass" if stats.max <= tolerance else "fail")
        best = record.best_alternate()
        alternate = best[1] if best else None
        if best is not None:
            if len(record.alternates) > 1:
                record.details["alternates"] = {label: s.max for label, s in record.alternates.items()}
            # a finding needs a failing printed residual that the alternate strictly improves
            if stats.max > tolerance and alternate < stats.max:
                self.context.add_finding(
                    entry.identity_id,
                    f"{entry.name} as written: max residual {stats.max:.3e}; alternate reading ({best[0]}): "
                    f"max residual {alternate:.3e}",
                )
        logger.info(f"{entry.identity_id} ({entry.name}): {verdict} (max {stats.max:.3e}, tol {tolerance:.1e}, "
                    f"{stats.samples} samples)")
        return IdentityResult(
            identity_id=entry.identity_id,
            name=entry.name,
            suite=self.name,
            description=entry.description,
            tier=entry.tier,
            tolerance=tolerance,
            max_residual=stats.max,
            mean_residual=stats.mean,
            samples=stats.samples,
            verdict=verdict,
            alternate_residual=alternate,
            details=record.details or None,
        )

    def _skipped(self, entry: IdentityEntry, reason: str) -> IdentityResult:
        logger.warning(f"{entry.identity_id} ({entry.name}): skipped ({reason})")
        return IdentityResult(
            identity_id=entry.identity_id,
            name=entry.name,
            suite=self.name,
            description=entry.description,
            tier=entry.tier,
            tolerance=self.context.tolerance(entry.tier),
            max_residual=0.0,
            mean_residual=0.0,
            samples=0,
            verdict="skipped",
            skipped_reason=reason,
        )
