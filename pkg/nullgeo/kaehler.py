"""
Kaehler Ambient

Lightlike hypersurfaces of (indefinite) Kaehler manifolds: the screen built
from the complex structure, S(TM) = (J xi + J N) _|_ D0, and the almost
contact structure (F, theta0, U) it carries.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from nullgeo.ambient import AmbientManifold
from nullgeo.error_handler import ConvergenceError, DegenerateScreenError
from nullgeo.hypersurface import (
    DEFAULT_RANK_TOL,
    Embedding,
    LightlikeHypersurface,
    complete_screen,
    radical_generator,
    transversal,
)
from nullgeo.tensor_fields import (
    DEFAULT_DERIVED_STEP,
    CallableField,
    ComponentField,
    PointwiseCache,
    covariant_derivative_all,
    covector_derivative_all,
    fd_derivative,
    residual,
)
from nullgeo.weyl import exterior_derivative, wedge_forms


logger = logging.getLogger(__name__)


@dataclass
class JScreen:
    """Screen built from J at one point"""
    vectors: np.ndarray
    transversal: np.ndarray
    d0: np.ndarray
    iterations: int
    last_change: float


@dataclass
class AlmostContactPack:
    """
    U = -J N, V = -J xi in chart components, theta0 = g0(., V), F = J o sigma

    F[c, b] = (F d_b)^c and sigma[c, b] = (sigma d_b)^c.
    """
    point: np.ndarray
    u: np.ndarray
    v: np.ndarray
    u_bar: np.ndarray
    v_bar: np.ndarray
    theta0: np.ndarray
    F: np.ndarray
    sigma: np.ndarray
    d0: np.ndarray
    transversal: np.ndarray


def _tangent_components(jac: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Chart components of an ambient vector tangent to the hypersurface"""
    solution, *_ = linalg.lstsq(jac, vector)
    return solution


def _d0_basis(constraints: np.ndarray, count: int, rank_tol: float) -> np.ndarray:
    """
    Basis of the common kernel of the constraint rows

    Coordinate vectors are projected onto the kernel in order and the first
    independent projections are kept.
    """
    d = constraints.shape[1]
    if count == 0:
        return np.zeros((0, d))
    kernel = linalg.null_space(constraints, rcond=rank_tol)
    if kernel.shape[1] != count:
        raise DegenerateScreenError(f"Almost complex distribution has rank {kernel.shape[1]}, expected {count}")
    projector = kernel @ kernel.T
    chosen: List[np.ndarray] = []
    for k in range(d):
        candidate = projector[:, k]
        trial = np.array(chosen + [candidate])
        if np.linalg.matrix_rank(trial, tol=1e-6) == len(trial):
            chosen.append(candidate)
        if len(chosen) == count:
            break
    return np.array(chosen)


class KaehlerHypersurface:
    """
    Lightlike hypersurface of a Kaehler ambient with the J-built screen

    The screen is found by fixed-point iteration: provisional screen, solve
    N, re-form {J xi, J N} + D0, repeat until N stabilises.

    Args:
        ambient: Ambient with complex structure
        embedding: Chart map of the hypersurface
        xi: Radical field; kernel of g when None
        max_iterations: Iteration cap for the screen
        tolerance: Convergence threshold on the change of N
    """

    def __init__(self, ambient: AmbientManifold, embedding: Embedding,
                 xi: Optional[ComponentField] = None, max_iterations: int = 50,
                 tolerance: float = 1e-10, rank_tol: float = DEFAULT_RANK_TOL,
                 step: float = DEFAULT_DERIVED_STEP):
        if not ambient.is_kaehler_candidate:
            raise ValueError("Ambient has no complex structure")
        self.ambient = ambient
        self.embedding = embedding
        self.chart_dim = embedding.chart_dim
        self.n = self.chart_dim - 1
        self.max_iterations = max_iterations
        self.tolerance = tolerance
        self.rank_tol = rank_tol
        self.step = step
        self.xi_field = xi if xi is not None else CallableField(self._kernel_xi, self.chart_dim, step=step)
        self._cache = PointwiseCache()
        screen_fields = [
            CallableField(lambda p, i=i: self.screen_at(p).vectors[i], self.chart_dim, step=step)
            for i in range(self.n)
        ]
        self.hypersurface = LightlikeHypersurface(ambient, embedding, self.xi_field, screen_fields,
                                                  rank_tol=rank_tol, fd_step=step)

    def _kernel_xi(self, p) -> np.ndarray:
        jac = self.embedding.jacobian(p)
        g = jac.T @ self.ambient.metric(self.embedding.point(p)) @ jac
        return radical_generator(0.5 * (g + g.T), self.rank_tol)

    # -- screen ------------------------------------------------------------------------

    def screen_at(self, p) -> JScreen:
        p = np.asarray(p, dtype=float)
        return self._cache.get_or_compute('screen', p, lambda: self._screen(p))

    def _screen(self, p: np.ndarray) -> JScreen:
        x = self.embedding.point(p)
        jac = self.embedding.jacobian(p)
        gbar = self.ambient.metric(x)
        j_bar = self.ambient.complex_matrix(x)
        xi = self.xi_field.value(p)
        xi_bar = jac @ xi

        screen = complete_screen(xi)
        n_bar = transversal(xi_bar, (jac @ screen.T).T, gbar)
        change = np.inf
        for iteration in range(1, self.max_iterations + 1):
            j_xi = j_bar @ xi_bar
            j_n = j_bar @ n_bar
            eta = n_bar @ gbar @ jac
            constraints = np.array([eta, (gbar @ j_xi) @ jac, (gbar @ j_n) @ jac])
            d0 = _d0_basis(constraints, self.n - 2, self.rank_tol)
            screen = np.vstack([_tangent_components(jac, j_xi), _tangent_components(jac, j_n), d0])
            updated = transversal(xi_bar, (jac @ screen.T).T, gbar)
            change = float(np.linalg.norm(updated - n_bar))
            n_bar = updated
            logger.debug(f"J-screen iteration {iteration}: |dN| = {change:.3e}")
            if change <= self.tolerance:
                return JScreen(vectors=screen, transversal=n_bar, d0=d0,
                               iterations=iteration, last_change=change)
        raise ConvergenceError(
            f"J-screen iteration did not converge in {self.max_iterations} steps",
            {"last_residual": change, "point": p.tolist()},
        )

    # -- almost contact structure --------------------------------------------------------

    def pack(self, p) -> AlmostContactPack:
        p = np.asarray(p, dtype=float)
        return self._cache.get_or_compute('pack', p, lambda: self._pack(p))

    def _pack(self, p: np.ndarray) -> AlmostContactPack:
        screen = self.screen_at(p)
        obj = self.hypersurface.objects(p)
        jac = obj.jacobian
        j_bar = self.ambient.complex_matrix(obj.ambient_point)
        u_bar = -j_bar @ obj.transversal
        v_bar = -j_bar @ obj.xi_bar
        u = _tangent_components(jac, u_bar)
        v = _tangent_components(jac, v_bar)
        theta0 = obj.metric @ v

        basis = np.column_stack([obj.xi, v] + list(screen.d0) + [u])
        coefficients = linalg.solve(basis, np.eye(self.chart_dim))
        sigma = np.eye(self.chart_dim) - np.outer(u, coefficients[-1])
        f_matrix = np.column_stack([
            _tangent_components(jac, j_bar @ jac @ sigma[:, b]) for b in range(self.chart_dim)
        ])
        return AlmostContactPack(point=p, u=u, v=v, u_bar=u_bar, v_bar=v_bar, theta0=theta0,
                                 F=f_matrix, sigma=sigma, d0=screen.d0, transversal=obj.transversal)

    def theta0_field(self) -> CallableField:
        """theta0 as a covector field for the Weyl module"""
        return CallableField(lambda p: self.pack(p).theta0, self.chart_dim, step=self.step)

    # -- algebraic identities ----------------------------------------------------------

    def isotropy(self, p) -> Tuple[float, float]:
        pack = self.pack(p)
        gbar = self.hypersurface.objects(p).ambient_metric
        return float(pack.u_bar @ gbar @ pack.u_bar), float(pack.v_bar @ gbar @ pack.v_bar)

    def splitting_residual(self, p, X: np.ndarray) -> float:
        """X against sigma X + theta0(X) U"""
        pack = self.pack(p)
        return residual(X, pack.sigma @ X + (pack.theta0 @ X) * pack.u)

    def complex_splitting_residual(self, p, X: np.ndarray) -> float:
        """J X against F X + theta0(X) N in ambient components"""
        pack = self.pack(p)
        obj = self.hypersurface.objects(p)
        j_bar = self.ambient.complex_matrix(obj.ambient_point)
        lhs = j_bar @ obj.jacobian @ X
        rhs = obj.jacobian @ pack.F @ X + (pack.theta0 @ X) * obj.transversal
        return residual(lhs, rhs)

    def almost_contact_residual(self, p, X: np.ndarray) -> float:
        """max of |F^2 X + X - theta0(X) U| and |theta0(U) - 1|"""
        pack = self.pack(p)
        square = residual(pack.F @ pack.F @ X, -X + (pack.theta0 @ X) * pack.u)
        return max(square, abs(float(pack.theta0 @ pack.u) - 1.0))

    def screen_decomposition_residual(self, p) -> float:
        """
        J xi and J N lie in the screen, D0 is orthogonal to both,
        nondegenerate and J-invariant
        """
        pack = self.pack(p)
        obj = self.hypersurface.objects(p)
        g = obj.metric
        checks = [abs(float(obj.eta @ pack.u)), abs(float(obj.eta @ pack.v))]
        if pack.d0.shape[0]:
            checks.append(float(np.max(np.abs(pack.d0 @ g @ np.column_stack([pack.u, pack.v])))))
            gram = pack.d0 @ g @ pack.d0.T
            if np.linalg.cond(gram) > 1e10:
                return 1.0
            j_bar = self.ambient.complex_matrix(obj.ambient_point)
            image = j_bar @ obj.jacobian @ pack.d0.T
            span = obj.jacobian @ pack.d0.T
            coefficients, *_ = linalg.lstsq(span, image)
            checks.append(residual(span @ coefficients, image))
        return max(checks)

    def theta_sharp_residual(self, p) -> float:
        """theta0^sharp against V"""
        obj = self.hypersurface.objects(p)
        pack = self.pack(p)
        associate = obj.metric + np.outer(obj.eta, obj.eta)
        return residual(linalg.solve(associate, pack.theta0), pack.v)

    # -- derivative identities -------------------------------------------------------------

    def theta0_jacobian(self, p) -> np.ndarray:
        return fd_derivative(lambda q: self.pack(q).theta0, p, self.step)

    def theta0_derivative(self, p) -> np.ndarray:
        """(D^{g0}_a theta0)(d_b)"""
        obj = self.hypersurface.objects(p)
        return covector_derivative_all(obj.gamma, self.pack(p).theta0, self.theta0_jacobian(p))

    def contact_form_derivative(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """(D_X theta0)(Y) against theta0(Y) phi(X) - B(X, FY)"""
        obj = self.hypersurface.objects(p)
        pack = self.pack(p)
        return self.theta0_derivative(p), np.outer(obj.phi, pack.theta0) - obj.B @ pack.F

    def contact_tensor_derivative(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """(D_X F)(Y) against theta0(Y) A_N X - B(X, Y) U, as [a, c, b]"""
        p = np.asarray(p, dtype=float)
        obj = self.hypersurface.objects(p)
        pack = self.pack(p)
        gamma = obj.gamma
        d_f = fd_derivative(lambda q: self.pack(q).F, p, self.step)
        lhs = (d_f
               + np.einsum('cae,eb->acb', gamma, pack.F)
               - np.einsum('eab,ce->acb', gamma, pack.F))
        rhs = np.einsum('b,ca->acb', pack.theta0, obj.A_N) - np.einsum('ab,c->acb', obj.B, pack.u)
        return lhs, rhs

    def radical_form_from_contact(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """phi(X) against -theta0(D_X U)"""
        p = np.asarray(p, dtype=float)
        obj = self.hypersurface.objects(p)
        pack = self.pack(p)
        nabla_u = covariant_derivative_all(obj.gamma, pack.u,
                                           fd_derivative(lambda q: self.pack(q).u, p, self.step))
        return obj.phi, -(nabla_u @ pack.theta0)

    def theta_sharp_derivative(self, p) -> np.ndarray:
        """D_a theta0^sharp with theta0^sharp = V"""
        p = np.asarray(p, dtype=float)
        obj = self.hypersurface.objects(p)
        return covariant_derivative_all(obj.gamma, self.pack(p).v,
                                        fd_derivative(lambda q: self.pack(q).v, p, self.step))

    def contact_vector_derivative(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """D_X theta0^sharp against F(A*_xi X) + phi(X) theta0^sharp, as [a, c]"""
        obj = self.hypersurface.objects(p)
        pack = self.pack(p)
        rhs = (pack.F @ obj.A_star).T + np.outer(obj.phi, pack.v)
        return self.theta_sharp_derivative(p), rhs

    def closedness(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """d theta0 against 1/2 phi ^ theta0"""
        obj = self.hypersurface.objects(p)
        return (exterior_derivative(self.theta0_jacobian(p)),
                0.5 * wedge_forms(obj.phi, self.pack(p).theta0))

    def proportionality_defect(self, p) -> float:
        obj = self.hypersurface.objects(p)
        theta0 = self.pack(p).theta0
        wedge = wedge_forms(obj.phi, theta0)
        scale = 1.0 + float(np.max(np.abs(obj.phi))) * float(np.max(np.abs(theta0)))
        return float(np.max(np.abs(wedge))) / scale


def closedness_verdict(closed_values: List[float], defects: List[float], tol: float) -> dict:
    """
    closed iff max |d theta0| <= tol; the criterion holds when that agrees
    with defect <= tol
    """
    closed = max(closed_values, default=0.0) <= tol
    proportional = max(defects, default=0.0) <= tol
    return {"closed": closed, "proportional": proportional,
            "proportionality_defect": max(defects, default=0.0),
            "criterion_holds": closed == proportional}


if __name__ == '__main__':
    from nullgeo.tensor_fields import ExpressionField

    print("Testing Kaehler hypersurface...")
    ambient = AmbientManifold.from_text(
        [["-1", "0", "0", "0"], ["0", "-1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]], 2,
        complex_structure=[["0", "-1", "0", "0"], ["1", "0", "0", "0"],
                           ["0", "0", "0", "-1"], ["0", "0", "1", "0"]],
    )
    kaehler = KaehlerHypersurface(ambient, Embedding.from_text(["x0", "x1", "x0", "x2"], 3),
                                  xi=ExpressionField.from_text(["1", "0", "0"], 3))
    point = np.array([0.1, 0.2, 0.3])
    pack = kaehler.pack(point)
    print(f"✓ N = {pack.transversal}")
    print(f"✓ theta0 = {pack.theta0}, theta0(U) = {pack.theta0 @ pack.u:.6f}")

    print("\nKaehler tests passed!")
