"""
Degenerate Calculus

Associate metric g~ = g + eta (x) eta, the pseudo-inverse g^[ab] and the
musical isomorphisms, gradient, divergence and Laplacian they define for a
degenerate metric.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from nullgeo.error_handler import SingularMetricError
from nullgeo.exprcalc import ScalarField
from nullgeo.tensor_fields import (
    DEFAULT_DERIVED_STEP,
    covariant_derivative_all,
    fd_derivative,
)


logger = logging.getLogger(__name__)


@dataclass
class PseudoInverseKit:
    """Pointwise g, eta, xi and the associate metric with its inverse"""
    metric: np.ndarray
    eta: np.ndarray
    xi: np.ndarray
    frame: np.ndarray
    associate: np.ndarray
    pseudo_inverse: np.ndarray

    @classmethod
    def build(cls, metric: np.ndarray, eta: np.ndarray, xi: np.ndarray,
              frame: Optional[np.ndarray] = None) -> 'PseudoInverseKit':
        """
        Raises:
            SingularMetricError: If g + eta (x) eta is not invertible
        """
        associate = metric + np.outer(eta, eta)
        if np.linalg.cond(associate) > 1e12:
            raise SingularMetricError("Associate metric g + eta (x) eta is singular")
        pseudo_inverse = linalg.inv(associate)
        return cls(metric=metric, eta=eta, xi=xi,
                   frame=frame if frame is not None else np.eye(metric.shape[0]),
                   associate=associate, pseudo_inverse=0.5 * (pseudo_inverse + pseudo_inverse.T))

    @property
    def dim(self) -> int:
        return self.metric.shape[0]


def flat(X: np.ndarray, kit: PseudoInverseKit) -> np.ndarray:
    """X^flat = g(X, .) + eta(X) eta"""
    return kit.metric @ X + (kit.eta @ X) * kit.eta


def sharp(omega: np.ndarray, kit: PseudoInverseKit) -> np.ndarray:
    return kit.pseudo_inverse @ omega


def dual_pairing_residual(omega: np.ndarray, X: np.ndarray, kit: PseudoInverseKit) -> float:
    """|omega(X) - g(omega^sharp, X) - omega(xi) eta(X)|"""
    lhs = float(omega @ X)
    rhs = float(sharp(omega, kit) @ kit.metric @ X + (omega @ kit.xi) * (kit.eta @ X))
    return abs(lhs - rhs) / (1.0 + max(abs(lhs), abs(rhs)))


def norm_squared(omega: np.ndarray, kit: PseudoInverseKit) -> float:
    """|omega^sharp|^2_g"""
    v = sharp(omega, kit)
    return float(v @ kit.metric @ v)


def grad(f: ScalarField, kit: PseudoInverseKit, p) -> np.ndarray:
    """g^[ab] f_a d_b"""
    return kit.pseudo_inverse @ f.gradient(p)


def div_from_derivative(nabla_x: np.ndarray, kit: PseudoInverseKit,
                        frame: Optional[np.ndarray] = None) -> float:
    """
    sum g^[ab] g~(D_a X, X_b) over a frame

    Args:
        nabla_x: nabla_x[a, c] = (D_{d_a} X)^c in coordinates
        kit: Pseudo-inverse kit at the point
        frame: Columns X_alpha; coordinate frame when None
    """
    if frame is None:
        return float(np.sum(kit.pseudo_inverse * (nabla_x @ kit.associate)))
    associate_frame = frame.T @ kit.associate @ frame
    derivative_frame = frame.T @ nabla_x
    pairing = derivative_frame @ kit.associate @ frame
    return float(np.sum(linalg.inv(associate_frame) * pairing))


def div(field_value: np.ndarray, field_jac: np.ndarray, gamma: np.ndarray,
        kit: PseudoInverseKit, frame: Optional[np.ndarray] = None) -> float:
    """Divergence of a vector field with exact (or supplied) partials"""
    return div_from_derivative(covariant_derivative_all(gamma, field_value, field_jac), kit, frame)


def gradient_field(f: ScalarField, kit_at: Callable[[np.ndarray], PseudoInverseKit]) -> Callable:
    return lambda q: grad(f, kit_at(q), q)


def laplacian(f: ScalarField, kit_at: Callable[[np.ndarray], PseudoInverseKit],
              gamma: np.ndarray, p, step: float = DEFAULT_DERIVED_STEP,
              frame: Optional[np.ndarray] = None) -> float:
    """
    div^g(grad^g f)

    The gradient field is differentiated by central differences since g~
    depends on the transversal.

    Args:
        f: Scalar field
        kit_at: Point -> PseudoInverseKit
        gamma: Induced connection coefficients at p
        p: Point
    """
    p = np.asarray(p, dtype=float)
    field = gradient_field(f, kit_at)
    return div(field(p), fd_derivative(field, p, step), gamma, kit_at(p), frame)


def hessian_trace(f: ScalarField, kit: PseudoInverseKit, gamma: np.ndarray, p) -> float:
    """g^[ab] (d_a d_b f - Gamma^c_ab f_c); equals the Laplacian when g~ is parallel"""
    second = f.hessian(p) - np.einsum('cab,c->ab', gamma, f.gradient(p))
    return float(np.sum(kit.pseudo_inverse * second))


def rotated_frame(kit: PseudoInverseKit, rng: np.random.Generator) -> np.ndarray:
    """Adapted frame with the screen block rotated by a random orthogonal matrix"""
    n = kit.dim - 1
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    screen = kit.frame[:, 1:] @ q
    return np.column_stack([kit.frame[:, 0], screen])


if __name__ == '__main__':
    print("Testing degenerate calculus...")
    g = np.diag([0.0, 1.0, 1.0])
    eta = np.array([1.0, 0.0, 0.0])
    kit = PseudoInverseKit.build(g, eta, np.array([1.0, 0.0, 0.0]))
    print(f"✓ flat(xi) = {flat(kit.xi, kit)}")
    print(f"✓ sharp(eta) = {sharp(eta, kit)}")
    print("\nDegenerate calculus tests passed!")
