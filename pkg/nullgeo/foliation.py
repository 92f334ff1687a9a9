"""
Umbilical Screen Foliations

Detection of a totally umbilical screen (C(X, PY) = lambda g(X, Y)), the
specialised S-tensor and its derivatives, and the Riemannian Weyl structure
induced on a leaf of the screen foliation.
"""

import logging
from typing import Sequence, Tuple

import numpy as np

from nullgeo.ambient import AmbientManifold
from nullgeo.exprcalc import ScalarField, apply_function, constant, parse
from nullgeo.tensor_fields import (
    ExpressionField,
    PointwiseCache,
    covariant_derivative_all,
    covector_derivative_all,
    curvature_tensor,
    fd_derivative,
    residual,
    ricci_from_curvature,
)
from nullgeo.weyl import WeylData


logger = logging.getLogger(__name__)


class UmbilicalData:
    """
    Pointwise umbilicity factor of the screen

    lambda(p) = tr(C_screen) / tr(g_screen) over the screen frame; the
    umbilicity residual compares C(X_alpha, W_j) with lambda g(X_alpha, W_j)
    including the xi row.
    """

    def __init__(self, weyl: WeylData):
        self.weyl = weyl
        self.member = weyl.member
        self._cache = PointwiseCache()

    def _screen_blocks(self, p) -> Tuple[np.ndarray, np.ndarray]:
        obj = self.member.objects(p)
        c_block = obj.frame.T @ obj.C @ obj.screen.T
        g_block = obj.frame.T @ obj.metric @ obj.screen.T
        return c_block, g_block

    def lambda_at(self, p) -> float:
        p = np.asarray(p, dtype=float)
        return self._cache.get_or_compute('lambda', p, lambda: self._lambda(p))

    def _lambda(self, p: np.ndarray) -> float:
        c_block, g_block = self._screen_blocks(p)
        return float(np.trace(c_block[1:]) / np.trace(g_block[1:]))

    def lambda_gradient(self, p) -> np.ndarray:
        return fd_derivative(self.lambda_at, p, self.weyl.step)

    def radical_lambda(self, p) -> float:
        """xi . lambda"""
        return float(self.member.objects(p).xi @ self.lambda_gradient(p))

    def umbilicity_residual(self, p) -> float:
        c_block, g_block = self._screen_blocks(p)
        return residual(c_block, self.lambda_at(p) * g_block)

    # -- specialised S-tensor ---------------------------------------------------------

    def s_on_screen(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """S(d_a, W_j) against lambda g(d_a, W_j) + eta_a theta(W_j)"""
        obj = self.member.objects(p)
        lhs = self.weyl.s_tensor(p) @ obj.screen.T
        rhs = (self.lambda_at(p) * obj.metric @ obj.screen.T
               + np.outer(obj.eta, obj.screen @ self.weyl.theta(p)))
        return lhs, rhs

    def s_radical(self, p) -> Tuple[np.ndarray, np.ndarray]:
        return self.weyl.radical_s_form(p), self.weyl.theta(p)

    def eta_derivative(self, p) -> np.ndarray:
        """(D^g_a eta)(d_b)"""
        p = np.asarray(p, dtype=float)
        obj = self.member.objects(p)
        jac = fd_derivative(lambda q: self.member.objects(q).eta, p, self.weyl.step)
        return covector_derivative_all(obj.gamma, obj.eta, jac)

    def s_derivative_formula(self, p) -> np.ndarray:
        """(D^g_Z S)(X, Y) from lambda, eta and theta"""
        obj = self.member.objects(p)
        theta = self.weyl.theta(p)
        d_eta = self.eta_derivative(p)
        d_theta = self.weyl.theta_derivative(p)
        return (np.einsum('z,xy->zxy', self.lambda_gradient(p), obj.metric)
                + np.einsum('x,zy->zxy', theta, d_eta) + np.einsum('y,zx->zxy', theta, d_eta)
                + np.einsum('x,zy->zxy', obj.eta, d_theta) + np.einsum('y,zx->zxy', obj.eta, d_theta))

    def s_derivative_radical_slot(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """(D^g_X S)(xi, Y) against (D^g_X theta)(Y) - phi(X) theta(Y)"""
        obj = self.member.objects(p)
        lhs = np.einsum('abc,b->ac', self.weyl.s_derivative(p), obj.xi)
        rhs = self.weyl.theta_derivative(p) - np.outer(obj.phi, self.weyl.theta(p))
        return lhs, rhs

    def s_derivative_along_radical(self, p) -> Tuple[np.ndarray, np.ndarray]:
        obj = self.member.objects(p)
        lhs = np.einsum('c,cab->ab', obj.xi, self.weyl.s_derivative(p))
        d_xi_theta = obj.xi @ self.weyl.theta_derivative(p)
        rhs = (self.radical_lambda(p) * obj.metric
               + np.outer(d_xi_theta, obj.eta) + np.outer(obj.eta, d_xi_theta))
        return lhs, rhs

    def radical_theta_derivative(self, p) -> np.ndarray:
        """(D^g_xi theta)(d_a); vanishes for Einstein-Weyl structures"""
        return self.member.objects(p).xi @ self.weyl.theta_derivative(p)

    def s_derivative_along_radical_reduced(self, p) -> Tuple[np.ndarray, np.ndarray]:
        obj = self.member.objects(p)
        lhs = np.einsum('c,cab->ab', obj.xi, self.weyl.s_derivative(p))
        return lhs, self.radical_lambda(p) * obj.metric

    def umbilical_ricci(self, p) -> Tuple[np.ndarray, np.ndarray]:
        """Ric^D against its umbilical Einstein-Weyl closed form"""
        p = np.asarray(p, dtype=float)
        obj = self.member.objects(p)
        n = self.member.n
        g = obj.metric
        theta = self.weyl.theta(p)
        rhs = (self.member.ricci(p)
               - 2.0 * self.weyl.d_theta(p)
               + (2 - n) * self.weyl.theta_derivative(p)
               + (n - 2) * np.outer(theta, theta)
               + (2 - n) * self.weyl.theta_norm_squared(p) * g
               - g * self.weyl.delta_theta(p)
               - self.radical_lambda(p) * g)
        return self.weyl.ricci(p), rhs

    def phi_theta(self, p) -> float:
        """phi_g(theta^sharp)"""
        return float(self.member.objects(p).phi @ self.weyl.theta_sharp(p))

    def umbilical_scalar(self, p, contracted: bool = False) -> Tuple[float, float]:
        """
        Scal^D against its umbilical closed form

        Args:
            contracted: drop the n phi_g(theta^sharp) term, which the g-trace
                of umbilical_ricci does not produce
        """
        p = np.asarray(p, dtype=float)
        n = self.member.n
        rhs = (self.member.scalar(p)
               + (2 - n) * (n - 1) * self.weyl.theta_norm_squared(p)
               + 2 * (1 - n) * self.weyl.delta_theta(p)
               - n * self.radical_lambda(p))
        if not contracted:
            rhs += n * self.phi_theta(p)
        return self.weyl.scalar(p), float(rhs)


def detect_umbilical(weyl: WeylData, points: Sequence[np.ndarray], tol: float = 1e-6) -> dict:
    """
    Returns:
        Dict with umbilical, lambda_samples and max residual
    """
    data = UmbilicalData(weyl)
    samples = [data.lambda_at(p) for p in points]
    worst = max((data.umbilicity_residual(p) for p in points), default=0.0)
    umbilical = worst <= tol
    logger.info(f"Umbilical screen: {umbilical} (max residual {worst:.3e})")
    return {"umbilical": umbilical, "lambda_samples": samples, "residual": worst}


class Leaf:
    """
    Leaf M' of the screen foliation as an explicit embedding into M

    The leaf metric and Weyl form are built symbolically, so the leaf
    Riemannian pipeline uses exact derivatives only.

    Args:
        weyl: Weyl data of the member whose restriction is studied
        embedding: n expressions in leaf coordinates u0..u_{n-1}
    """

    def __init__(self, weyl: WeylData, embedding: Sequence[ScalarField]):
        self.weyl = weyl
        self.member = weyl.member
        self.embedding = list(embedding)
        self.dim = self.embedding[0].dim
        hypersurface = self.member.hypersurface
        if len(self.embedding) != hypersurface.chart_dim:
            raise ValueError(f"Leaf embedding needs {hypersurface.chart_dim} components")
        if not isinstance(weyl.theta0, ExpressionField):
            raise ValueError("Leaf restriction needs theta0 given by expressions")

        ambient_map = [c.compose(self.embedding) for c in hypersurface.embedding.components]
        ambient_metric = [[entry.compose(ambient_map) for entry in row]
                          for row in hypersurface.ambient.metric_components]
        weight = apply_function('exp', self.member.f.compose(self.embedding) * -2.0)
        metric = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                total = constant(0.0, self.dim)
                for a, phi_a in enumerate(ambient_map):
                    for b, phi_b in enumerate(ambient_map):
                        if ambient_metric[a][b].is_zero():
                            continue
                        total = total + ambient_metric[a][b] * phi_a.exact_partial(i) * phi_b.exact_partial(j)
                row.append(weight * total)
            metric.append(row)
        self.manifold = AmbientManifold(metric, 0)

        theta = [component + self.member.f.exact_partial(a)
                 for a, component in enumerate(weyl.theta0.components)]
        theta_leaf = []
        for i in range(self.dim):
            total = constant(0.0, self.dim)
            for a, component in enumerate(theta):
                total = total + component.compose(self.embedding) * self.embedding[a].exact_partial(i)
            theta_leaf.append(total)
        self.theta = ExpressionField(theta_leaf)
        self._cache = PointwiseCache()

    @classmethod
    def level_set(cls, weyl: WeylData, value: float) -> 'Leaf':
        """Leaf x0 = value with the remaining chart coordinates as leaf coordinates"""
        n = weyl.member.n
        components = [constant(value, n)] + [parse(f"x{i}", n) for i in range(n)]
        return cls(weyl, components)

    @classmethod
    def from_text(cls, weyl: WeylData, texts: Sequence[str]) -> 'Leaf':
        n = weyl.member.n
        return cls(weyl, [parse(t, n) for t in texts])

    def point(self, u) -> np.ndarray:
        return np.array([c.evaluate(u) for c in self.embedding], dtype=float)

    def tangent(self, u) -> np.ndarray:
        """T[a, i] = d_i Psi^a"""
        return np.array([[c.exact_partial(i).evaluate(u) for i in range(self.dim)]
                         for c in self.embedding])

    def screen_defect(self, u) -> float:
        """max |eta(d_i Psi)|; zero when the leaf is tangent to the screen"""
        obj = self.member.objects(self.point(u))
        return float(np.max(np.abs(obj.eta @ self.tangent(u))))

    def restrict(self, tensor: np.ndarray, u) -> np.ndarray:
        t = self.tangent(u)
        return t.T @ tensor @ t

    # -- leaf Riemannian pipeline ------------------------------------------------------

    def metric(self, u) -> np.ndarray:
        return self.manifold.metric(u)

    def theta_sharp(self, u) -> np.ndarray:
        return np.linalg.solve(self.metric(u), self.theta.value(u))

    def theta_norm_squared(self, u) -> float:
        return float(self.theta.value(u) @ self.theta_sharp(u))

    def theta_derivative(self, u) -> np.ndarray:
        """Leaf Levi-Civita derivative of theta'"""
        return covector_derivative_all(self.manifold.christoffel(u), self.theta.value(u), self.theta.jacobian(u))

    def _theta_sharp_jacobian(self, u) -> np.ndarray:
        ginv = self.manifold.metric_inverse(u)
        s = self.theta_sharp(u)
        dg = self.manifold.metric_derivative(u)
        return (-np.einsum('ce,keb,b->kc', ginv, dg, s)
                + np.einsum('ce,ke->kc', ginv, self.theta.jacobian(u)))

    def delta_theta(self, u) -> float:
        """Leaf divergence of theta'^sharp"""
        nabla = covariant_derivative_all(self.manifold.christoffel(u), self.theta_sharp(u),
                                         self._theta_sharp_jacobian(u))
        return float(np.trace(nabla))

    def weyl_connection(self, u) -> np.ndarray:
        gamma = self.manifold.christoffel(u)
        theta = self.theta.value(u)
        identity = np.eye(self.dim)
        return (gamma
                + np.einsum('a,cb->cab', theta, identity)
                + np.einsum('b,ca->cab', theta, identity)
                - np.einsum('ab,c->cab', self.metric(u), self.theta_sharp(u)))

    def weyl_connection_derivative(self, u) -> np.ndarray:
        """Exact dGamma'^D[k, c, a, b]"""
        identity = np.eye(self.dim)
        dtheta = self.theta.jacobian(u)
        return (self.manifold.christoffel_derivative(u)
                + np.einsum('ka,cb->kcab', dtheta, identity)
                + np.einsum('kb,ca->kcab', dtheta, identity)
                - np.einsum('kab,c->kcab', self.manifold.metric_derivative(u), self.theta_sharp(u))
                - np.einsum('ab,kc->kcab', self.metric(u), self._theta_sharp_jacobian(u)))

    def weyl_ricci(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self._cache.get_or_compute('weyl_ricci', u, lambda: ricci_from_curvature(
            curvature_tensor(self.weyl_connection(u), self.weyl_connection_derivative(u))))

    def weyl_scalar(self, u) -> float:
        return float(np.sum(self.manifold.metric_inverse(u) * self.weyl_ricci(u)))

    def einstein_fit(self, u) -> Tuple[float, float]:
        """Lambda' with Ric^{D'} + Ric^{D'}^T = Lambda' g' and the fit residual"""
        symmetric = self.weyl_ricci(u) + self.weyl_ricci(u).T
        g = self.metric(u)
        einstein = float(np.sum(symmetric * g) / np.sum(g * g))
        return einstein, residual(symmetric, einstein * g)

    def einstein_metric_condition(self, u, einstein: float) -> Tuple[np.ndarray, np.ndarray]:
        """Ric^{g'} against -1/2 D'(theta) + [Lambda'/2 - ((2-n)|theta|^2 - delta theta)] g'"""
        n = self.dim
        g = self.metric(u)
        theta = self.theta.value(u)
        nabla = self.theta_derivative(u)
        operator = (2 - n) * (nabla + nabla.T - 2.0 * np.outer(theta, theta))
        bracket = 0.5 * einstein - ((2 - n) * self.theta_norm_squared(u) - self.delta_theta(u))
        return self.manifold.ricci(u), -0.5 * operator + bracket * g

    def weyl_scalar_relation(self, u, delta_sign: float = 1.0) -> Tuple[float, float]:
        """
        Scal^{D'} against Scal^{g'} + 2(n-1) delta theta' - (n-1)(n-2)|theta'|^2

        Args:
            delta_sign: -1 evaluates the reading with the divergence sign flipped
        """
        n = self.dim
        rhs = (self.manifold.scalar_curvature(u)
               + delta_sign * 2 * (n - 1) * self.delta_theta(u)
               - (n - 1) * (n - 2) * self.theta_norm_squared(u))
        return self.weyl_scalar(u), float(rhs)


def default_leaf_value(ranges: Sequence[Sequence[float]]) -> float:
    return 0.5 * (ranges[0][0] + ranges[0][1])


if __name__ == '__main__':
    from nullgeo.ambient import flat_ambient
    from nullgeo.hypersurface import Embedding, LightlikeHypersurface
    from nullgeo.weyl import ConformalClassMember

    print("Testing umbilical screen foliation...")
    hyperplane = LightlikeHypersurface(
        flat_ambient([-1.0, 1.0, 1.0, 1.0]),
        Embedding.from_text(["x0", "x0", "x1", "x2"], 3),
        xi=ExpressionField.from_text(["1", "0", "0"], 3),
        screen=[ExpressionField.from_text(["0", "1", "0"], 3),
                ExpressionField.from_text(["0", "0", "1"], 3)],
    )
    weyl = WeylData(ConformalClassMember(hyperplane), ExpressionField.from_text(
        ["0", "0.2 + 0.15*x1 - 0.3*x2", "0.1 + 0.3*x1 + 0.15*x2"], 3))
    point = np.array([0.0, 0.3, -0.1])
    print(f"✓ lambda = {UmbilicalData(weyl).lambda_at(point):.3e}")
    leaf = Leaf.level_set(weyl, 0.0)
    print(f"✓ leaf Lambda' fit: {leaf.einstein_fit(point[1:])}")

    print("\nFoliation tests passed!")
