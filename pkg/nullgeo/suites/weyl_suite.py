"""
Weyl Suite

Weyl screen structure D of the conformal class [g0] on a totally geodesic
lightlike hypersurface: metricity, screen and radical parallelism, the
S-tensor, closed forms of curvature, Ricci and scalar curvature, conformal
invariance and the Einstein-Weyl conditions.
"""

import logging
from typing import List, Optional

from nullgeo.suites.base import IdentityRecord, IdentitySkipped, IdentitySuite, horizontal, vanishing
from nullgeo.tensor_fields import AffineField, covariant_derivative_all, residual
from nullgeo.weyl import WeylData


logger = logging.getLogger(__name__)


class WeylSuite(IdentitySuite):
    """Identities of the Weyl connection attached to (g, theta_g)"""

    name = "weyl"
    description = "Weyl screen structures of the conformal class"

    def skip_reason(self) -> Optional[str]:
        if not self.context.spec.has_weyl:
            return "spec has no weyl.theta0"
        status = self.context.geodesic_status()
        if not status["totally_geodesic"]:
            return f"hypersurface is not totally geodesic (max |B| = {status['max_B']:.3e})"
        return None

    def prepare(self):
        tol = self.context.tolerance('derivative')
        points = self.context.points
        self.context.hypersurface.check_screen_integrable(points, tol)
        self.context.member.check_conformal_factor(points, self.context.tolerance('algebraic'))
        for weyl in self.context.rescaled_weyls():
            weyl.member.check_conformal_factor(points, self.context.tolerance('algebraic'))

    def members(self) -> List[WeylData]:
        """The GeometrySpec member followed by its horizontal rescalings"""
        return [self.context.weyl] + self.context.rescaled_weyls()

    # -- first order -------------------------------------------------------------------

    def check_conformal_factor_radical(self, record: IdentityRecord):
        members = self.members()
        self.each_point(record, lambda i, p, rng: [abs(w.member.radical_derivative(p)) for w in members])
        record.details["members"] = [w.member.label for w in members]

    def check_weyl_form_horizontal(self, record: IdentityRecord):
        members = self.members()

        def evaluate(index, p, rng):
            xi = self.context.hypersurface.objects(p).xi
            return [vanishing(float(w.theta(p) @ xi), w.theta(p)) for w in members]

        self.each_point(record, evaluate)

    def check_weyl_metricity(self, record: IdentityRecord):
        members = self.members()
        self.each_point(record, lambda i, p, rng: [residual(*w.metric_defect(p)) for w in members])

    def check_screen_parallelism(self, record: IdentityRecord):
        weyl = self.context.weyl

        def evaluate(index, p, rng):
            obj = weyl.member.objects(p)
            connection = weyl.connection(p)
            values = []
            for w, w_jac in zip(obj.screen, obj.screen_jac):
                derivative = covariant_derivative_all(connection, w, w_jac)
                values.append(vanishing(derivative @ obj.eta, derivative))
            return values

        self.each_point(record, evaluate)

    def check_weyl_torsion_free(self, record: IdentityRecord):
        weyl = self.context.weyl
        count = self.context.config.grid.random_vectors

        def evaluate(index, p, rng):
            values = []
            for _ in range(count):
                x_field = AffineField.random(rng, p)
                y_field = AffineField.random(rng, p)
                torsion = weyl.weyl_connection(p, x_field, y_field) - weyl.weyl_connection(p, y_field, x_field)
                bracket = (x_field.value(p) @ y_field.jacobian(p) - y_field.value(p) @ x_field.jacobian(p))
                values.append(residual(torsion, bracket))
            return values

        self.each_point(record, evaluate)

    def check_radical_parallel(self, record: IdentityRecord):
        weyl = self.context.weyl

        def evaluate(index, p, rng):
            obj = weyl.member.objects(p)
            derivative = covariant_derivative_all(weyl.connection(p), obj.xi, obj.xi_jac)
            return vanishing(derivative @ obj.metric, derivative)

        self.each_point(record, evaluate)

    def check_radical_affine(self, record: IdentityRecord):
        members = self.members()

        def evaluate(index, p, rng):
            values = []
            for w in members:
                obj = w.member.objects(p)
                values.append(vanishing(obj.xi @ obj.nabla_xi, obj.nabla_xi))
            return values

        self.each_point(record, evaluate)

    def check_s_tensor_radical(self, record: IdentityRecord):
        weyl = self.context.weyl

        def evaluate(index, p, rng):
            obj = weyl.member.objects(p)
            s = weyl.s_tensor(p)
            return [
                vanishing(float(obj.xi @ s @ obj.xi), s),
                residual(weyl.radical_s_form(p), obj.xi @ obj.C + weyl.theta(p)),
            ]

        self.each_point(record, evaluate)

    # -- curvature -----------------------------------------------------------------------

    def check_curvature_closed_form(self, record: IdentityRecord):
        weyl = self.context.weyl
        alternates = []

        def evaluate(index, p, rng):
            values = []
            for _ in range(self.context.config.grid.random_vectors):
                X, Y, Z = self.context.vectors(rng, 3)
                direct = weyl.curvature_direct(p, X, Y, Z)
                values.append(residual(direct, weyl.curvature_formula(p, X, Y, Z)))
                alternates.append(residual(direct, weyl.curvature_formula(p, X, Y, Z, k_sign=-1.0)))
            return values

        self.each_point(record, evaluate)
        record.add_alternate(alternates)

    def check_k_tensor_horizontal(self, record: IdentityRecord):
        weyl = self.context.base_weyl

        def evaluate(index, p, rng):
            obj = weyl.member.objects(p)
            values = []
            for _ in range(self.context.config.grid.random_vectors):
                X, Y, Z = (horizontal(v, obj.eta, obj.xi) for v in self.context.vectors(rng, 3))
                values.append(residual(*weyl.k_horizontal(p, X, Y, Z)))
            return values

        self.each_point(record, evaluate)
        record.details["member"] = weyl.member.label

    def check_ricci_closed_form(self, record: IdentityRecord):
        weyl = self.context.weyl
        self.each_point(record, lambda i, p, rng: residual(weyl.ricci(p), weyl.ricci_formula(p)))

    def check_ricci_conformal_invariance(self, record: IdentityRecord):
        rescaled = self.context.rescaled_weyls()
        if not rescaled:
            raise IdentitySkipped("no horizontal rescalings (conformal.f absent and no conformal.rescalings)")
        weyl = self.context.weyl
        self.each_point(record, lambda i, p, rng: [residual(w.ricci(p), weyl.ricci(p)) for w in rescaled])
        record.details["rescalings"] = [f.to_text() for f in self.context.rescalings()]

    def check_ricci_antisymmetric_part(self, record: IdentityRecord):
        members = self.members()

        def evaluate(index, p, rng):
            values = []
            for w in members:
                ricci = w.member.ricci(p)
                values.append(residual(ricci - ricci.T, 2.0 * w.phi_derivative(p)))
            return values

        self.each_point(record, evaluate)

    def check_scalar_closed_form(self, record: IdentityRecord):
        weyl = self.context.weyl
        alternates = []

        def evaluate(index, p, rng):
            scalar = weyl.scalar(p)
            alternates.append(residual(scalar, weyl.scalar_formula(p, contracted=True)))
            return residual(scalar, weyl.scalar_formula(p))

        self.each_point(record, evaluate)
        record.add_alternate(alternates)

    def check_einstein_weyl(self, record: IdentityRecord):
        weyl = self.context.weyl
        einstein = []
        einstein_bar = []

        def evaluate(index, p, rng):
            value, fit_residual = weyl.einstein_fit(p)
            einstein.append(value)
            einstein_bar.append(weyl.metric_condition(p, value)[2])
            return fit_residual

        self.each_point(record, evaluate)
        record.details["lambda"] = {"min": min(einstein), "max": max(einstein)}
        record.details["lambda_bar"] = {"min": min(einstein_bar), "max": max(einstein_bar)}

    def check_symmetric_ricci_decomposition(self, record: IdentityRecord):
        weyl = self.context.weyl

        def evaluate(index, p, rng):
            ricci = weyl.ricci(p)
            return residual(ricci + ricci.T, weyl.symmetric_ricci_formula(p))

        self.each_point(record, evaluate)

    def check_einstein_weyl_metric_condition(self, record: IdentityRecord):
        weyl = self.context.weyl
        tol = self.context.tolerance('curvature')

        def evaluate(index, p, rng):
            value, fit_residual = weyl.einstein_fit(p)
            if fit_residual > tol:
                raise IdentitySkipped(f"structure is not Einstein-Weyl (fit residual {fit_residual:.3e})")
            lhs, rhs, _ = weyl.metric_condition(p, value)
            return residual(lhs, rhs)

        self.each_point(record, evaluate)
