"""
Hypersurface Suite

Oracles for the expression calculus and the ambient connection, then the
normalization, second fundamental form and Gauss-Weingarten identities of
the lightlike hypersurface with its screen.
"""

import itertools
import logging
from typing import List, Tuple

import numpy as np

from nullgeo.exprcalc import ScalarField, derivative_oracle_residual
from nullgeo.suites.base import IdentityRecord, IdentitySuite, vanishing
from nullgeo.tensor_fields import AffineField, covariant_derivative, lie_bracket, residual


logger = logging.getLogger(__name__)

# Leading grid points sampled by the holonomy oracle
HOLONOMY_POINTS = 4


class HypersurfaceSuite(IdentitySuite):
    """Induced geometry of (M, g, S(TM)) in the ambient chart"""

    name = "hypersurface"
    description = "normalization, second fundamental forms and the Gauss-Weingarten decomposition"

    def _expressions(self) -> List[Tuple[str, ScalarField]]:
        """(domain, field) for every expression of the GeometrySpec; domain is ambient, chart or leaf"""
        spec = self.context.spec
        fields: List[Tuple[str, ScalarField]] = []
        for row in spec.metric:
            fields.extend(('ambient', entry) for entry in row)
        for row in spec.complex_structure or []:
            fields.extend(('ambient', entry) for entry in row)
        chart_fields = list(spec.embedding) + list(spec.xi or []) + list(spec.theta0 or [])
        for components in spec.screen or []:
            chart_fields.extend(components)
        if spec.f is not None:
            chart_fields.append(spec.f)
        chart_fields.extend(spec.rescalings)
        fields.extend(('chart', entry) for entry in chart_fields)
        fields.extend(('leaf', entry) for entry in spec.leaf or [])
        return fields

    # -- oracles -------------------------------------------------------------------------

    def check_derivative_oracle(self, record: IdentityRecord):
        expressions = [(domain, field) for domain, field in self._expressions() if not field.is_constant()]
        step = self.context.config.numerics.fd_step
        embedding = self.context.hypersurface.embedding

        def evaluate(index, p, rng):
            at = {'chart': p, 'ambient': embedding.point(p), 'leaf': p[1:]}
            return max((derivative_oracle_residual(field, at[domain], step) for domain, field in expressions),
                       default=0.0)

        self.each_point(record, evaluate)
        record.details["expressions"] = len(expressions)

    def check_ambient_metricity(self, record: IdentityRecord):
        ambient = self.context.ambient
        self.each_point(record, lambda i, p, rng: ambient.metricity_residual(
            self.context.hypersurface.embedding.point(p)))

    def check_ambient_bianchi(self, record: IdentityRecord):
        ambient = self.context.ambient
        count = self.context.config.grid.random_vectors

        def evaluate(index, p, rng):
            x = self.context.hypersurface.embedding.point(p)
            return [ambient.bianchi_residual(x, *rng.standard_normal((3, ambient.dim))) for _ in range(count)]

        self.each_point(record, evaluate)

    def check_ambient_holonomy(self, record: IdentityRecord):
        ambient = self.context.ambient
        side = self.context.config.numerics.holonomy_side
        points = self.context.points[:HOLONOMY_POINTS]

        def evaluate(index, p, rng):
            x = self.context.hypersurface.embedding.point(p)
            curvature = ambient.curvature(x)
            return [vanishing(ambient.holonomy_curvature(x, c, d, side) - curvature[:, :, c, d],
                              curvature[:, :, c, d])
                    for c, d in itertools.combinations(range(ambient.dim), 2)]

        self.each_point(record, evaluate, points)
        record.details["side"] = side
        record.details["points"] = len(points)

    # -- normalization -----------------------------------------------------------------------

    def check_radical_kernel(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            return vanishing(obj.metric @ obj.xi, obj.metric)

        self.each_point(record, evaluate)

    def check_normalization_pair(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            gbar = obj.ambient_metric
            n_bar = obj.transversal
            lhs = np.concatenate([[n_bar @ gbar @ obj.xi_bar, n_bar @ gbar @ n_bar], obj.screen_bar @ gbar @ n_bar])
            rhs = np.zeros_like(lhs)
            rhs[0] = 1.0
            return residual(lhs, rhs)

        self.each_point(record, evaluate)
        record.details["within_solver_tolerance"] = record.stats.max <= self.context.config.tolerances.solver

    # -- second fundamental forms -----------------------------------------------------------------

    def check_second_form_radical(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            return vanishing(obj.B @ obj.xi, obj.B)

        self.each_point(record, evaluate)

    def check_shape_operator_pairing(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            return residual(obj.B, obj.A_star.T @ obj.metric)

        self.each_point(record, evaluate)

    def check_shape_operator_radical(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            return vanishing(obj.A_star @ obj.xi, obj.A_star)

        self.each_point(record, evaluate)

    def check_second_form_symmetry(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface
        self.each_point(record, lambda i, p, rng: residual(hypersurface.objects(p).B,
                                                           hypersurface.objects(p).B.T))

    def check_induced_torsion_free(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface
        count = self.context.config.grid.random_vectors

        def evaluate(index, p, rng):
            gamma = hypersurface.objects(p).gamma
            values = []
            for _ in range(count):
                x_field = AffineField.random(rng, p)
                y_field = AffineField.random(rng, p)
                x, x_jac = x_field.value(p), x_field.jacobian(p)
                y, y_jac = y_field.value(p), y_field.jacobian(p)
                torsion = (covariant_derivative(gamma, y, y_jac, x)
                           - covariant_derivative(gamma, x, x_jac, y))
                values.append(residual(torsion, lie_bracket(x, x_jac, y, y_jac)))
            return values

        self.each_point(record, evaluate)

    def check_metric_derivative_relation(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            expected = np.einsum('ab,c->abc', obj.B, obj.eta) + np.einsum('ac,b->abc', obj.B, obj.eta)
            return residual(hypersurface.metric_covariant_derivative(p), expected)

        self.each_point(record, evaluate)

    def check_totally_geodesic(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            nabla_g = hypersurface.metric_covariant_derivative(p)
            return max(float(np.linalg.norm(obj.B)), vanishing(nabla_g, obj.metric_derivative))

        self.each_point(record, evaluate)
        status = self.context.geodesic_status()
        record.details["max_B"] = status["max_B"]
        record.details["metric_residual"] = status["metric_residual"]

    def check_screen_integrability(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface
        if hypersurface.n < 2:
            record.details["note"] = "one-dimensional screen"
        self.each_point(record, lambda i, p, rng: hypersurface.screen_integrability_residual(p))

    def check_gauss_weingarten_decomposition(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            obj = hypersurface.objects(p)
            reconstructed = (np.einsum('Ac,cab->abA', obj.jacobian, obj.gamma)
                             + np.einsum('ab,A->abA', obj.B, obj.transversal))
            return [
                residual(obj.acceleration, reconstructed),
                residual(obj.B, obj.B_pairing),
                residual(obj.C, obj.A_N.T @ obj.metric),
                residual(obj.phi, -obj.tau),
            ]

        self.each_point(record, evaluate)
