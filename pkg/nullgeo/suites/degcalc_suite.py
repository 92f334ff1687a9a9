"""
Degenerate Calculus Suite

Musical isomorphisms, gradient, divergence and Laplacian of the degenerate
induced metric through the associate metric g + eta (x) eta.
"""

import logging

import numpy as np

from nullgeo import degcalc
from nullgeo.degcalc import PseudoInverseKit
from nullgeo.exprcalc import ScalarField, parse
from nullgeo.suites.base import IdentityRecord, IdentitySuite, vanishing
from nullgeo.tensor_fields import AffineField, bilinear_derivative_all, fd_derivative, residual


logger = logging.getLogger(__name__)


class DegcalcSuite(IdentitySuite):
    """Calculus of the pseudo-inverse g^[ab] on the base hypersurface"""

    name = "degcalc"
    description = "flat/sharp, gradient, divergence and Laplacian of the degenerate metric"

    def kit_at(self, p) -> PseudoInverseKit:
        obj = self.context.hypersurface.objects(p)
        return PseudoInverseKit.build(obj.metric, obj.eta, obj.xi, obj.frame)

    def sample_field(self) -> ScalarField:
        """Scalar field the gradient and Laplacian are tested on"""
        f = self.context.spec.f
        if f is not None and not f.is_constant():
            return f
        last = self.context.spec.chart_dim - 1
        return parse(f"x1^2 + 0.5*x0*x{last}", self.context.spec.chart_dim)

    def associate_parallel(self, p) -> bool:
        """Whether g + eta (x) eta is parallel for the induced connection at p"""
        gamma = self.context.hypersurface.objects(p).gamma
        associate = self.kit_at(p).associate
        jac = fd_derivative(lambda q: self.kit_at(q).associate, p, self.context.step)
        return vanishing(bilinear_derivative_all(gamma, associate, jac), jac) <= self.context.tolerance('derivative')

    def check_flat_isomorphism(self, record: IdentityRecord):
        def evaluate(index, p, rng):
            kit = self.kit_at(p)
            values = [residual(degcalc.flat(X, kit), kit.metric @ X + (kit.eta @ X) * kit.eta)
                      for X in self.context.vectors(rng)]
            values += [residual(degcalc.sharp(degcalc.flat(X, kit), kit), X) for X in self.context.vectors(rng)]
            return values

        self.each_point(record, evaluate)

    def check_associate_metric(self, record: IdentityRecord):
        def evaluate(index, p, rng):
            kit = self.kit_at(p)
            screen = kit.frame[:, 1:].T
            return [
                residual(screen @ kit.associate @ screen.T, screen @ kit.metric @ screen.T),
                residual(kit.pseudo_inverse @ kit.associate, np.eye(kit.dim)),
            ]

        self.each_point(record, evaluate)

    def check_dual_pairing(self, record: IdentityRecord):
        def evaluate(index, p, rng):
            kit = self.kit_at(p)
            return [degcalc.dual_pairing_residual(omega, X, kit)
                    for omega, X in zip(self.context.vectors(rng), self.context.vectors(rng))]

        self.each_point(record, evaluate)

    def check_gradient_contract(self, record: IdentityRecord):
        f = self.sample_field()

        def evaluate(index, p, rng):
            kit = self.kit_at(p)
            gradient = degcalc.grad(f, kit, p)
            return [residual((kit.associate @ gradient) @ X, f.gradient(p) @ X) for X in self.context.vectors(rng)]

        self.each_point(record, evaluate)
        record.details["field"] = f.to_text()

    def check_divergence_frame_independence(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface

        def evaluate(index, p, rng):
            kit = self.kit_at(p)
            gamma = hypersurface.objects(p).gamma
            field = AffineField.random(rng, p)
            value, jac = field.value(p), field.jacobian(p)
            coordinate = degcalc.div(value, jac, gamma, kit)
            adapted = degcalc.div(value, jac, gamma, kit, kit.frame)
            rotated = degcalc.div(value, jac, gamma, kit, degcalc.rotated_frame(kit, rng))
            return [residual(coordinate, adapted), residual(coordinate, rotated)]

        self.each_point(record, evaluate)

    def check_laplacian_consistency(self, record: IdentityRecord):
        hypersurface = self.context.hypersurface
        f = self.sample_field()
        step = self.context.step
        compared = []

        def evaluate(index, p, rng):
            kit = self.kit_at(p)
            gamma = hypersurface.objects(p).gamma
            value = degcalc.laplacian(f, self.kit_at, gamma, p, step)
            values = [residual(value, degcalc.laplacian(f, self.kit_at, gamma, p, step,
                                                        degcalc.rotated_frame(kit, rng)))]
            if self.associate_parallel(p):
                values.append(residual(value, degcalc.hessian_trace(f, kit, gamma, p)))
                compared.append(index)
            return values

        self.each_point(record, evaluate)
        record.details["field"] = f.to_text()
        record.details["hessian_trace_points"] = len(compared)
