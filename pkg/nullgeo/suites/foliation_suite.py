"""
Foliation Suite

Totally umbilical screens: the specialised S-tensor and its derivatives,
the Einstein-Weyl facts they imply, and the Riemannian Weyl structure
induced on a leaf of the screen foliation in a flat ambient.

Identities run on the base member g0 and again on the run member g when
its screen is umbilical as well. A horizontal factor f adds -eta (x) df to
the screen form C, so only a factor constant on the screen keeps g in.
"""

import logging
from typing import List, Optional

import numpy as np

from nullgeo.foliation import Leaf, UmbilicalData, default_leaf_value, detect_umbilical
from nullgeo.sampling import build_grid
from nullgeo.suites.base import IdentityRecord, IdentitySkipped, IdentitySuite, vanishing
from nullgeo.tensor_fields import residual
from nullgeo.weyl import WeylData


logger = logging.getLogger(__name__)


class FoliationSuite(IdentitySuite):
    """Umbilical screen identities and the leaf transfer relations"""

    name = "foliation"
    description = "umbilical screens, Einstein-Weyl facts and leaf restrictions"

    def __init__(self, context, registry):
        super().__init__(context, registry)
        self._active: Optional[WeylData] = None

    def skip_reason(self) -> Optional[str]:
        if not self.context.spec.has_weyl:
            return "spec has no weyl.theta0"
        status = self.context.geodesic_status()
        if not status["totally_geodesic"]:
            return f"hypersurface is not totally geodesic (max |B| = {status['max_B']:.3e})"
        umbilical = self.umbilical_status()
        if not umbilical["umbilical"]:
            return f"screen is not totally umbilical (residual {umbilical['residual']:.3e})"
        return None

    def prepare(self):
        self.context.hypersurface.check_screen_integrable(self.context.points, self.context.tolerance('derivative'))
        self.context.metadata["foliation_members"] = [w.member.label for w in self.members()]

    # -- members ---------------------------------------------------------------------------

    @property
    def weyl(self) -> WeylData:
        return self._active or self.context.base_weyl

    def members(self) -> List[WeylData]:
        """g0, then the run member g when its screen is umbilical too"""
        return self.context.cached('foliation_members', self._select_members)

    def _select_members(self) -> List[WeylData]:
        base = self.context.base_weyl
        weyl = self.context.weyl
        if weyl is base:
            return [base]
        status = detect_umbilical(weyl, self.context.points, self.context.tolerance('derivative'))
        if status["umbilical"]:
            return [base, weyl]
        reason = f"{weyl.member.label}: screen is not totally umbilical (residual {status['residual']:.3e})"
        logger.info(f"Foliation identities use g0 only ({reason})")
        self.context.metadata["foliation_excluded"] = reason
        return [base]

    def evaluate_check(self, record: IdentityRecord):
        members = self.members()
        skipped = []
        for weyl in members:
            self._active = weyl
            try:
                super().evaluate_check(record)
            except IdentitySkipped as e:
                skipped.append(str(e) if len(members) == 1 else f"{weyl.member.label}: {e}")
            finally:
                self._active = None
        if record.stats.samples == 0 and skipped:
            raise IdentitySkipped("; ".join(skipped))
        if len(members) > 1:
            record.details["members"] = [w.member.label for w in members]
        if skipped:
            record.details["skipped_members"] = skipped

    def _key(self, name: str) -> str:
        return f"{name}:{self.weyl.member.label}"

    @property
    def umbilical(self) -> UmbilicalData:
        return self.context.cached(self._key('umbilical'), lambda: UmbilicalData(self.weyl))

    def umbilical_status(self) -> dict:
        return self.context.cached(self._key('umbilical_status'), lambda: detect_umbilical(
            self.weyl, self.context.points, self.context.tolerance('derivative')))

    def require_einstein_weyl(self):
        tol = self.context.tolerance('curvature')
        worst = self.context.cached(self._key('einstein_weyl_residual'), lambda: max(
            self.weyl.einstein_fit(p)[1] for p in self.context.points))
        if worst > tol:
            raise IdentitySkipped(f"screen structure is not Einstein-Weyl (fit residual {worst:.3e})")

    # -- leaf ------------------------------------------------------------------------------

    @property
    def leaf(self) -> Leaf:
        spec = self.context.spec

        def build():
            if spec.leaf is not None:
                return Leaf(self.weyl, spec.leaf)
            return Leaf.level_set(self.weyl, default_leaf_value(spec.ranges))

        return self.context.cached(self._key('leaf'), build)

    def leaf_points(self) -> List[np.ndarray]:
        spec = self.context.spec
        grid_config = self.context.config.grid
        grid = build_grid(spec.ranges[1:], spec.points_per_axis or grid_config.points_per_axis,
                          grid_config.random_points, self.context.seed)
        return grid.points

    def require_leaf(self):
        """Flat ambient and a leaf tangent to the screen"""
        ambient = self.context.ambient
        tol = self.context.tolerance('algebraic')
        if not self.context.cached('ambient_flat', lambda: ambient.is_flat(self.context.ambient_points(), tol)):
            raise IdentitySkipped("ambient is not flat")
        leaf = self.leaf
        worst = max(leaf.screen_defect(u) for u in self.leaf_points())
        if worst > self.context.tolerance('derivative'):
            raise IdentitySkipped(f"leaf is not tangent to the screen (eta defect {worst:.3e})")

    def each_leaf_point(self, record: IdentityRecord, evaluate):
        self.require_leaf()
        self.each_point(record, evaluate, points=self.leaf_points())

    # -- umbilical screen ------------------------------------------------------------------

    def check_umbilical_screen(self, record: IdentityRecord):
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: data.umbilicity_residual(p))
        samples = self.umbilical_status()["lambda_samples"]
        record.details["lambda"] = {"min": min(samples), "max": max(samples)}

    def check_umbilical_s_tensor(self, record: IdentityRecord):
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: residual(*data.s_on_screen(p)))

    def check_umbilical_s_radical(self, record: IdentityRecord):
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: residual(*data.s_radical(p)))

    def check_s_tensor_derivative(self, record: IdentityRecord):
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: residual(self.weyl.s_derivative(p), data.s_derivative_formula(p)))

    def check_s_derivative_radical_slot(self, record: IdentityRecord):
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: residual(*data.s_derivative_radical_slot(p)))

    def check_s_derivative_along_radical(self, record: IdentityRecord):
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: residual(*data.s_derivative_along_radical(p)))

    # -- Einstein-Weyl facts -------------------------------------------------------------------

    def check_radical_weyl_form_parallel(self, record: IdentityRecord):
        self.require_einstein_weyl()
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: vanishing(data.radical_theta_derivative(p),
                                                            self.weyl.theta_derivative(p)))

    def check_s_derivative_along_radical_reduced(self, record: IdentityRecord):
        self.require_einstein_weyl()
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: residual(*data.s_derivative_along_radical_reduced(p)))

    def check_umbilical_ricci(self, record: IdentityRecord):
        self.require_einstein_weyl()
        data = self.umbilical
        self.each_point(record, lambda i, p, rng: residual(*data.umbilical_ricci(p)))

    def check_umbilical_scalar(self, record: IdentityRecord):
        self.require_einstein_weyl()
        data = self.umbilical
        alternates = []

        def evaluate(index, p, rng):
            alternates.append(residual(*data.umbilical_scalar(p, contracted=True)))
            return residual(*data.umbilical_scalar(p))

        self.each_point(record, evaluate)
        record.add_alternate(alternates)

    # -- leaf restrictions ---------------------------------------------------------------------

    def check_leaf_levi_civita(self, record: IdentityRecord):
        manifold = self.leaf.manifold

        def evaluate(index, u, rng):
            gamma = manifold.christoffel(u)
            return [manifold.metricity_residual(u), residual(gamma, np.transpose(gamma, (0, 2, 1)))]

        self.each_point(record, evaluate, points=self.leaf_points())

    def check_leaf_ricci(self, record: IdentityRecord):
        leaf = self.leaf
        member = self.weyl.member
        self.each_leaf_point(record, lambda i, u, rng: residual(
            leaf.restrict(member.ricci(leaf.point(u)), u), leaf.manifold.ricci(u)))

    def check_leaf_scalar(self, record: IdentityRecord):
        leaf = self.leaf
        member = self.weyl.member
        self.each_leaf_point(record, lambda i, u, rng: residual(
            member.scalar(leaf.point(u)), leaf.manifold.scalar_curvature(u)))

    def check_leaf_weyl_form_derivative(self, record: IdentityRecord):
        leaf = self.leaf
        self.each_leaf_point(record, lambda i, u, rng: residual(
            leaf.restrict(self.weyl.theta_derivative(leaf.point(u)), u), leaf.theta_derivative(u)))

    def check_leaf_einstein_weyl(self, record: IdentityRecord):
        self.require_einstein_weyl()
        leaf = self.leaf
        fitted = []

        def evaluate(index, u, rng):
            einstein, fit_residual = leaf.einstein_fit(u)
            fitted.append(einstein)
            return [fit_residual, residual(*leaf.einstein_metric_condition(u, einstein))]

        self.each_leaf_point(record, evaluate)
        record.details["lambda_leaf"] = {"min": min(fitted), "max": max(fitted)}

    def check_einstein_function_transfer(self, record: IdentityRecord):
        self.require_einstein_weyl()
        leaf = self.leaf
        data = self.umbilical
        alternates = []

        def evaluate(index, u, rng):
            x = leaf.point(u)
            half_difference = 0.5 * (self.weyl.einstein_fit(x)[0] - leaf.einstein_fit(u)[0])
            radical = data.radical_lambda(x)
            alternates.append(residual(half_difference, -radical))
            return residual(half_difference, data.phi_theta(x) + 2.0 * radical)

        self.each_leaf_point(record, evaluate)
        record.add_alternate(alternates)

    def check_leaf_weyl_scalar(self, record: IdentityRecord):
        leaf = self.leaf
        alternates = []

        def evaluate(index, u, rng):
            alternates.append(residual(*leaf.weyl_scalar_relation(u, delta_sign=-1.0)))
            return residual(*leaf.weyl_scalar_relation(u))

        self.each_leaf_point(record, evaluate)
        record.add_alternate(alternates)

    def check_leaf_scalar_transfer(self, record: IdentityRecord):
        self.require_einstein_weyl()
        leaf = self.leaf
        data = self.umbilical
        n = self.weyl.n
        readings = {
            "delta' theta sign flipped": [],
            "umbilical scalar with the corrected leaf scalar": [],
            "contracted Ricci closed form": [],
        }
        flipped, combined, contracted = readings.values()

        def evaluate(index, u, rng):
            x = leaf.point(u)
            lhs = self.weyl.scalar(x)
            leaf_scalar = leaf.weyl_scalar(u)
            delta = 4 * (n - 1) * leaf.delta_theta(u)
            phi_theta = data.phi_theta(x)
            radical = n * data.radical_lambda(x)
            flipped.append(residual(lhs, leaf_scalar + delta + (3 - 2 * n) * phi_theta - radical))
            combined.append(residual(lhs, leaf_scalar + n * phi_theta - radical))
            contracted.append(residual(lhs, leaf_scalar - radical))
            return residual(lhs, leaf_scalar - delta + (3 - 2 * n) * phi_theta - radical)

        self.each_leaf_point(record, evaluate)
        for label, values in readings.items():
            record.add_alternate(values, label)
