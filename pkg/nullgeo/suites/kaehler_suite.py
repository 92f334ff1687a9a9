"""
Kaehler Suite

Lightlike hypersurfaces of indefinite Kaehler ambients with the screen
built from J: isotropy of U and V, the almost contact structure
(F, theta0, U), derivatives of theta0, F and theta0^sharp, and the
closedness criterion for theta0.
"""

import logging
from typing import Optional

import numpy as np

from nullgeo.kaehler import KaehlerHypersurface, closedness_verdict
from nullgeo.suites.base import IdentityRecord, IdentitySkipped, IdentitySuite, vanishing
from nullgeo.tensor_fields import AffineField, residual
from nullgeo.weyl import exterior_derivative, wedge_forms


logger = logging.getLogger(__name__)


class KaehlerSuite(IdentitySuite):
    """Almost contact identities of the J-built screen"""

    name = "kaehler"
    description = "screen from the complex structure, almost contact structure and closedness of theta0"

    def skip_reason(self) -> Optional[str]:
        if not self.context.spec.has_complex_structure:
            return "ambient has no complex structure"
        return None

    def prepare(self):
        self.context.ambient.check_invariants(self.context.ambient_points(), self.context.tolerance('algebraic'))
        self.context.metadata["radical_form_from_contact"] = (
            "phi(X) = -theta0(D_X U): the derivative is taken of U, completing the stated form"
        )

    @property
    def kaehler(self) -> KaehlerHypersurface:
        spec = self.context.spec
        numerics = self.context.config.numerics

        def build():
            return KaehlerHypersurface(
                self.context.ambient, spec.build_embedding(), xi=spec.xi_field(),
                max_iterations=numerics.kaehler_max_iterations, tolerance=numerics.kaehler_tolerance,
                rank_tol=numerics.rank_tol, step=self.context.step,
            )

        return self.context.cached('kaehler', build)

    def require_totally_geodesic(self):
        status = self.kaehler.hypersurface.check_totally_geodesic(self.context.points,
                                                                  self.context.tolerance('derivative'))
        if not status["totally_geodesic"]:
            raise IdentitySkipped(f"hypersurface is not totally geodesic (max |B| = {status['max_B']:.3e})")

    # -- ambient and algebraic identities ------------------------------------------------------

    def check_complex_structure(self, record: IdentityRecord):
        ambient = self.context.ambient
        embedding = self.context.hypersurface.embedding
        self.each_point(record, lambda i, p, rng: max(ambient.kaehler_residuals(embedding.point(p)).values()))

    def check_isotropic_pair(self, record: IdentityRecord):
        kaehler = self.kaehler

        def evaluate(index, p, rng):
            pack = kaehler.pack(p)
            return vanishing(np.array(kaehler.isotropy(p)), np.concatenate([pack.u_bar, pack.v_bar]))

        self.each_point(record, evaluate)
        record.details["d0_rank"] = int(kaehler.pack(self.context.points[0]).d0.shape[0])

    def check_radical_weyl_form(self, record: IdentityRecord):
        kaehler = self.kaehler
        factors = ([self.context.spec.f] if self.context.spec.f is not None else []) + self.context.rescalings()

        def evaluate(index, p, rng):
            obj = kaehler.hypersurface.objects(p)
            theta0 = kaehler.pack(p).theta0
            values = [kaehler.theta_sharp_residual(p), vanishing(float(theta0 @ obj.xi), theta0)]
            for f in factors:
                theta = theta0 + f.gradient(p)
                values.append(vanishing(float(theta @ obj.xi), theta))
            return values

        self.each_point(record, evaluate)
        record.details["members"] = 1 + len(factors)

    def check_tangent_splitting(self, record: IdentityRecord):
        kaehler = self.kaehler
        self.each_point(record, lambda i, p, rng: [kaehler.splitting_residual(p, X)
                                                   for X in self.context.vectors(rng)])

    def check_complex_structure_splitting(self, record: IdentityRecord):
        kaehler = self.kaehler
        self.each_point(record, lambda i, p, rng: [kaehler.complex_splitting_residual(p, X)
                                                   for X in self.context.vectors(rng)])

    def check_almost_contact(self, record: IdentityRecord):
        kaehler = self.kaehler

        def evaluate(index, p, rng):
            pack = kaehler.pack(p)
            values = [kaehler.almost_contact_residual(p, X) for X in self.context.vectors(rng)]
            values.append(vanishing(pack.F @ pack.u, pack.F))
            return values

        self.each_point(record, evaluate)

    def check_screen_complex_decomposition(self, record: IdentityRecord):
        kaehler = self.kaehler
        self.each_point(record, lambda i, p, rng: kaehler.screen_decomposition_residual(p))
        screen = kaehler.screen_at(self.context.points[0])
        record.details["iterations"] = screen.iterations

    # -- derivative identities ----------------------------------------------------------------

    def check_contact_form_derivative(self, record: IdentityRecord):
        kaehler = self.kaehler
        self.each_point(record, lambda i, p, rng: residual(*kaehler.contact_form_derivative(p)))

    def check_contact_tensor_derivative(self, record: IdentityRecord):
        kaehler = self.kaehler
        self.each_point(record, lambda i, p, rng: residual(*kaehler.contact_tensor_derivative(p)))

    def check_radical_form_from_contact(self, record: IdentityRecord):
        kaehler = self.kaehler
        self.each_point(record, lambda i, p, rng: residual(*kaehler.radical_form_from_contact(p)))

    def check_contact_vector_derivative(self, record: IdentityRecord):
        kaehler = self.kaehler
        self.each_point(record, lambda i, p, rng: residual(*kaehler.contact_vector_derivative(p)))

    def check_totally_geodesic_contact(self, record: IdentityRecord):
        self.require_totally_geodesic()
        kaehler = self.kaehler

        def evaluate(index, p, rng):
            obj = kaehler.hypersurface.objects(p)
            pack = kaehler.pack(p)
            return [
                residual(kaehler.theta0_derivative(p), np.outer(obj.phi, pack.theta0)),
                residual(kaehler.theta_sharp_derivative(p), np.outer(obj.phi, pack.v)),
            ]

        self.each_point(record, evaluate)

    def check_closedness_criterion(self, record: IdentityRecord):
        self.require_totally_geodesic()
        kaehler = self.kaehler
        kaehler.hypersurface.check_screen_integrable(self.context.points, self.context.tolerance('derivative'))
        closed_values = []
        defects = []

        def evaluate(index, p, rng):
            d_theta, half_wedge = kaehler.closedness(p)
            closed_values.append(float(np.max(np.abs(d_theta))))
            defects.append(kaehler.proportionality_defect(p))
            return residual(d_theta, half_wedge)

        self.each_point(record, evaluate)
        verdict = closedness_verdict(closed_values, defects, self.context.tolerance('finite_difference'))
        record.details.update(verdict)
        if not verdict["criterion_holds"]:
            record.forced_verdict = "fail"

    def check_exterior_derivative_convention(self, record: IdentityRecord):
        kaehler = self.kaehler

        def evaluate(index, p, rng):
            form = AffineField.random(rng, p)
            theta, jac = form.value(p), form.jacobian(p)
            h_slope = rng.standard_normal(p.shape[0])
            h_value = float(rng.standard_normal())
            product_jac = np.outer(h_slope, theta) + h_value * jac
            d_theta = exterior_derivative(jac)
            d_theta0 = exterior_derivative(kaehler.theta0_jacobian(p))
            return [
                residual(d_theta, -d_theta.T),
                residual(exterior_derivative(product_jac), h_value * d_theta + 0.5 * wedge_forms(h_slope, theta)),
                residual(d_theta0, -d_theta0.T),
            ]

        self.each_point(record, evaluate)
