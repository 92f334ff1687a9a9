"""
Lightlike Hypersurface

Induced degenerate metric, radical generator, screen frame, transversal
section N and the Gauss-Weingarten objects (B, tau, A_N, C, phi, A*) of a
hypersurface embedded in one ambient chart.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from nullgeo.ambient import AmbientManifold
from nullgeo.error_handler import (
    DegenerateScreenError,
    NonIntegrableScreenError,
    NotLightlikeError,
)
from nullgeo.exprcalc import ScalarField, parse
from nullgeo.tensor_fields import (
    DEFAULT_DERIVED_STEP,
    CallableField,
    ComponentField,
    PointwiseCache,
    bilinear_derivative_all,
    covariant_derivative_all,
    fd_derivative,
    lie_bracket,
    residual,
)


logger = logging.getLogger(__name__)


DEFAULT_RANK_TOL = 1e-9
MAX_FRAME_CONDITION = 1e10


class Embedding:
    """Map from the hypersurface chart (dim n+1) into the ambient chart (dim n+2)"""

    def __init__(self, components: Sequence[ScalarField]):
        self.components = list(components)
        self.ambient_dim = len(self.components)
        self.chart_dim = self.components[0].dim

    @classmethod
    def from_text(cls, texts: Sequence[str], chart_dim: int) -> 'Embedding':
        return cls([parse(t, chart_dim) for t in texts])

    def point(self, p) -> np.ndarray:
        return np.array([c.evaluate(p) for c in self.components])

    def jacobian(self, p) -> np.ndarray:
        """J[A, a] = d_a Phi^A"""
        return np.array([
            [c.exact_partial(a).evaluate(p) for a in range(self.chart_dim)]
            for c in self.components
        ])

    def hessian(self, p) -> np.ndarray:
        """H[a, b, A] = d_a d_b Phi^A"""
        return np.array([
            [[c.exact_partial(a).exact_partial(b).evaluate(p) for c in self.components]
             for b in range(self.chart_dim)]
            for a in range(self.chart_dim)
        ])


def metric_rank(g: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> Tuple[int, np.ndarray]:
    """Numerical rank with a threshold relative to the largest singular value"""
    singular_values = linalg.svd(g, compute_uv=False)
    threshold = rank_tol * max(float(singular_values[0]), 1e-300)
    return int(np.sum(singular_values > threshold)), singular_values


def check_lightlike(g: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL, point=None):
    """
    Require rank(g) = dim - 1

    Raises:
        NotLightlikeError: With the singular values when the rank differs
    """
    n = g.shape[0] - 1
    rank, singular_values = metric_rank(g, rank_tol)
    if rank != n:
        message = f"Induced metric has rank {rank} ≠ n = {n}"
        if rank == n + 1:
            message += " (rank n+1 ≠ n: nondegenerate, not lightlike)"
        raise NotLightlikeError(message, {
            "singular_values": singular_values.tolist(),
            "point": None if point is None else list(map(float, point)),
        })


def radical_generator(g: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """
    Unit Euclidean kernel vector of a degenerate metric

    Orientation: first nonzero component positive.

    Raises:
        NotLightlikeError: If the kernel is not one-dimensional
    """
    kernel = linalg.null_space(g, rcond=rank_tol)
    if kernel.shape[1] != 1:
        raise NotLightlikeError(f"Kernel of the induced metric has dimension {kernel.shape[1]} ≠ 1",
                                {"singular_values": linalg.svd(g, compute_uv=False).tolist()})
    xi = kernel[:, 0] / np.linalg.norm(kernel[:, 0])
    for component in xi:
        if abs(component) > 1e-12:
            if component < 0:
                xi = -xi
            break
    return xi


def solve_full_pivot(system: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Square solve through LAPACK getc2/gesc2 (row and column pivoting)"""
    lu, ipiv, jpiv, info = lapack.dgetc2(np.array(system, dtype=float))
    if info > 0:
        logger.debug(f"getc2 perturbed pivot {info} of the normalization system")
    x, scale = lapack.dgesc2(lu, np.array(rhs, dtype=float), ipiv, jpiv)
    return x / scale


def transversal(xi_bar: np.ndarray, screen_bar: np.ndarray, gbar: np.ndarray) -> np.ndarray:
    """
    Unique null transversal N with g(N, xi) = 1 and g(N, W_i) = 0

    Solves g(V, xi) = 1, g(V, W_i) = 0 with the Euclidean gauge xi . V = 0
    by LU with complete pivoting, then corrects V along xi so that N is null.

    Args:
        xi_bar: Radical generator in ambient components (m,)
        screen_bar: Screen vectors in ambient components (n, m)
        gbar: Ambient metric at the point (m, m)

    Raises:
        DegenerateScreenError: If the system is singular
    """
    rows = [gbar @ xi_bar] + [gbar @ w for w in screen_bar] + [xi_bar]
    system = np.array(rows)
    rhs = np.zeros(system.shape[0])
    rhs[0] = 1.0
    if np.linalg.cond(system) > MAX_FRAME_CONDITION:
        raise DegenerateScreenError("Normalization system for N is singular; screen is not complementary")
    v = solve_full_pivot(system, rhs)
    return v - 0.5 * float(v @ gbar @ v) * xi_bar


def complete_screen(xi: np.ndarray) -> np.ndarray:
    """
    Non-canonical screen: Gram-Schmidt of coordinate vectors against xi

    Returns:
        Array (n, n+1) of screen vectors, Euclidean orthonormal and orthogonal to xi
    """
    d = xi.shape[0]
    basis = [xi / np.linalg.norm(xi)]
    screen = []
    for k in range(d):
        v = np.zeros(d)
        v[k] = 1.0
        for b in basis:
            v = v - (v @ b) * b
        if np.linalg.norm(v) > 0.1:
            v = v / np.linalg.norm(v)
            basis.append(v)
            screen.append(v)
        if len(screen) == d - 1:
            break
    return np.array(screen)


def screen_forms(gamma: np.ndarray, eta: np.ndarray, xi: np.ndarray, xi_jac: np.ndarray,
                 screen: np.ndarray, screen_jac: np.ndarray, frame: np.ndarray):
    """
    Screen objects of a connection with coefficients gamma

    D_X PY = D*_X PY + C(X, PY) xi, D_X xi = -A*_xi X + phi(X) xi

    Returns:
        (C, phi, A_star, nabla_xi) with C[a, b] = C(d_a, P d_b),
        A_star[c, a] = (A*_xi d_a)^c and nabla_xi[a, c] = (D_a xi)^c
    """
    d = xi.shape[0]
    c_screen = np.array([
        covariant_derivative_all(gamma, screen[i], screen_jac[i]) @ eta
        for i in range(screen.shape[0])
    ]).T
    coefficients = np.linalg.solve(frame, np.eye(d))
    c_matrix = c_screen @ coefficients[1:, :]
    nabla_xi = covariant_derivative_all(gamma, xi, xi_jac)
    phi = nabla_xi @ eta
    a_star = -(nabla_xi - np.outer(phi, xi)).T
    return c_matrix, phi, a_star, nabla_xi


@dataclass
class InducedObjects:
    """Pointwise Gauss-Weingarten package of the hypersurface"""
    point: np.ndarray
    ambient_point: np.ndarray
    jacobian: np.ndarray
    hessian: np.ndarray
    ambient_metric: np.ndarray
    ambient_gamma: np.ndarray
    metric: np.ndarray
    metric_derivative: np.ndarray
    xi: np.ndarray
    xi_jac: np.ndarray
    screen: np.ndarray
    screen_jac: np.ndarray
    frame: np.ndarray
    transversal: np.ndarray
    eta: np.ndarray
    acceleration: np.ndarray
    gamma: np.ndarray
    B: np.ndarray
    B_pairing: np.ndarray
    tau: np.ndarray
    A_N: np.ndarray
    C: np.ndarray
    phi: np.ndarray
    A_star: np.ndarray
    nabla_xi: np.ndarray

    @property
    def xi_bar(self) -> np.ndarray:
        return self.jacobian @ self.xi

    @property
    def screen_bar(self) -> np.ndarray:
        return (self.jacobian @ self.screen.T).T

    @property
    def projection(self) -> np.ndarray:
        """P as a matrix: P X = X - eta(X) xi"""
        return np.eye(self.xi.shape[0]) - np.outer(self.xi, self.eta)


class LightlikeHypersurface:
    """
    Lightlike hypersurface with normalizing pair and screen

    Args:
        ambient: Ambient manifold of dimension n+2
        embedding: Chart map of dimension n+1
        xi: Radical field; computed from the kernel of g when None
        screen: n screen fields; completed by Gram-Schmidt when None
        rank_tol: Relative singular-value threshold for the kernel
        fd_step: Step for finite differences of derived fields
    """

    def __init__(self, ambient: AmbientManifold, embedding: Embedding,
                 xi: Optional[ComponentField] = None,
                 screen: Optional[Sequence[ComponentField]] = None,
                 rank_tol: float = DEFAULT_RANK_TOL,
                 fd_step: float = DEFAULT_DERIVED_STEP):
        if embedding.ambient_dim != ambient.dim:
            raise ValueError(f"Embedding has {embedding.ambient_dim} components, ambient dim is {ambient.dim}")
        if ambient.dim != embedding.chart_dim + 1:
            raise ValueError("Chart dimension must be ambient dimension - 1")
        self.ambient = ambient
        self.embedding = embedding
        self.chart_dim = embedding.chart_dim
        self.n = self.chart_dim - 1
        self.rank_tol = rank_tol
        self.fd_step = fd_step
        self.xi_field = xi if xi is not None else CallableField(self._kernel_xi, self.chart_dim, step=fd_step)
        self.xi_from_spec = xi is not None
        if screen is None:
            logger.warning("No screen supplied; completing by Gram-Schmidt (non-canonical)")
            self.screen_fields = [
                CallableField(lambda p, i=i: complete_screen(self.xi_field.value(p))[i],
                              self.chart_dim, step=fd_step)
                for i in range(self.n)
            ]
            self.screen_completed = True
        else:
            if len(screen) != self.n:
                raise DegenerateScreenError(f"Screen needs {self.n} fields, got {len(screen)}")
            self.screen_fields = list(screen)
            self.screen_completed = False
        self._cache = PointwiseCache()

    def _kernel_xi(self, p) -> np.ndarray:
        return radical_generator(self.induced_metric(p), self.rank_tol)

    # -- metric -----------------------------------------------------------------

    def induced_metric(self, p, check: bool = True) -> np.ndarray:
        """
        Pullback J^T g J

        Raises:
            NotLightlikeError: If check is set and the rank is not n
        """
        jac = self.embedding.jacobian(p)
        g = jac.T @ self.ambient.metric(self.embedding.point(p)) @ jac
        g = 0.5 * (g + g.T)
        if check:
            check_lightlike(g, self.rank_tol, p)
        return g

    def metric_derivative(self, p) -> np.ndarray:
        """Exact dg[a, b, c] = d_a g_bc"""
        x = self.embedding.point(p)
        jac = self.embedding.jacobian(p)
        hess = self.embedding.hessian(p)
        gbar = self.ambient.metric(x)
        dgbar = np.einsum('ka,kAB->aAB', jac, self.ambient.metric_derivative(x))
        return (np.einsum('abA,AB,Bc->abc', hess, gbar, jac)
                + np.einsum('Ab,AB,acB->abc', jac, gbar, hess)
                + np.einsum('Ab,aAB,Bc->abc', jac, dgbar, jac))

    # -- frame ---------------------------------------------------------------

    def screen_values(self, p) -> Tuple[np.ndarray, np.ndarray]:
        values = np.array([w.value(p) for w in self.screen_fields])
        jacobians = np.array([w.jacobian(p) for w in self.screen_fields])
        return values, jacobians

    def transversal(self, p) -> np.ndarray:
        """Ambient components of N at p"""
        return self._cache.get_or_compute('transversal', p, lambda: self._transversal(p))

    def _transversal(self, p) -> np.ndarray:
        jac = self.embedding.jacobian(p)
        xi_bar = jac @ self.xi_field.value(p)
        screen = np.array([w.value(p) for w in self.screen_fields])
        screen_bar = (jac @ screen.T).T
        return transversal(xi_bar, screen_bar, self.ambient.metric(self.embedding.point(p)))

    def eta(self, p) -> np.ndarray:
        jac = self.embedding.jacobian(p)
        return self.transversal(p) @ self.ambient.metric(self.embedding.point(p)) @ jac

    # -- Gauss-Weingarten ----------------------------------------------------------

    def objects(self, p) -> InducedObjects:
        """
        Full pointwise package at p

        Raises:
            NotLightlikeError: Rank of g is not n
            DegenerateScreenError: Screen Gram matrix or frame singular
        """
        p = np.asarray(p, dtype=float)
        return self._cache.get_or_compute('objects', p, lambda: self._objects(p))

    def _objects(self, p: np.ndarray) -> InducedObjects:
        d = self.chart_dim
        g = self.induced_metric(p)
        x = self.embedding.point(p)
        jac = self.embedding.jacobian(p)
        hess = self.embedding.hessian(p)
        gbar = self.ambient.metric(x)
        gamma_bar = self.ambient.christoffel(x)

        xi = self.xi_field.value(p)
        xi_jac = self.xi_field.jacobian(p)
        screen, screen_jac = self.screen_values(p)
        gram = screen @ g @ screen.T
        if np.linalg.cond(gram) > MAX_FRAME_CONDITION:
            raise DegenerateScreenError("Screen Gram matrix is singular", {"point": p.tolist()})
        frame = np.column_stack([xi] + list(screen))
        if np.linalg.cond(frame) > MAX_FRAME_CONDITION:
            raise DegenerateScreenError("Screen does not complement the radical", {"point": p.tolist()})

        n_bar = self.transversal(p)
        eta = n_bar @ gbar @ jac
        xi_bar = jac @ xi

        acceleration = hess + np.einsum('ABC,Ba,Cb->abA', gamma_bar, jac, jac)
        system = np.column_stack([jac, n_bar])
        coefficients = linalg.solve(system, acceleration.reshape(d * d, -1).T)
        gamma = coefficients[:d].reshape(d, d, d)
        b_form = coefficients[d].reshape(d, d)
        b_pairing = np.einsum('abA,AB,B->ab', acceleration, gbar, xi_bar)

        dn = fd_derivative(self.transversal, p, self.fd_step)
        nabla_n = dn + np.einsum('ABC,Ba,C->aA', gamma_bar, jac, n_bar)
        n_coefficients = linalg.solve(system, nabla_n.T)
        a_n = -n_coefficients[:d]
        tau = n_coefficients[d]

        c_matrix, phi, a_star, nabla_xi = screen_forms(gamma, eta, xi, xi_jac, screen, screen_jac, frame)

        return InducedObjects(
            point=p, ambient_point=x, jacobian=jac, hessian=hess,
            ambient_metric=gbar, ambient_gamma=gamma_bar,
            metric=g, metric_derivative=self.metric_derivative(p),
            xi=xi, xi_jac=xi_jac, screen=screen, screen_jac=screen_jac, frame=frame,
            transversal=n_bar, eta=eta, acceleration=acceleration,
            gamma=gamma, B=b_form, B_pairing=b_pairing, tau=tau, A_N=a_n,
            C=c_matrix, phi=phi, A_star=a_star, nabla_xi=nabla_xi,
        )

    def gauss_weingarten(self, p, X: np.ndarray, Y: np.ndarray) -> dict:
        """
        Decomposition slices for tangent vectors X, Y at p

        Returns:
            Dict with nabla_XY (tangent part of the ambient derivative of the
            coordinate extension), B(X, Y), C(X, PY), phi(X), A*_xi X, A_N X, tau(X)
        """
        obj = self.objects(p)
        return {
            "nabla": np.einsum('cab,a,b->c', obj.gamma, X, Y),
            "B": float(X @ obj.B @ Y),
            "C": float(X @ obj.C @ Y),
            "phi": float(obj.phi @ X),
            "A_star": obj.A_star @ X,
            "A_N": obj.A_N @ X,
            "tau": float(obj.tau @ X),
        }

    def metric_covariant_derivative(self, p) -> np.ndarray:
        """(nabla_a g)(d_b, d_c)"""
        obj = self.objects(p)
        return bilinear_derivative_all(obj.gamma, obj.metric, obj.metric_derivative)

    # -- global checks ---------------------------------------------------------------

    def check_totally_geodesic(self, points, tol: float = 1e-6) -> dict:
        """
        max ||B||_F over the points; when below tol also checks that the
        induced connection is metric

        Returns:
            Dict with totally_geodesic, max_B, metric_residual
        """
        max_b = 0.0
        metric_residual = 0.0
        for p in points:
            obj = self.objects(p)
            max_b = max(max_b, float(np.linalg.norm(obj.B)))
            nabla_g = self.metric_covariant_derivative(p)
            metric_residual = max(metric_residual, residual(nabla_g, np.zeros_like(nabla_g)))
        geodesic = max_b <= tol
        if geodesic and metric_residual > tol:
            logger.warning(f"B vanishes but nabla g residual is {metric_residual:.3e}")
        return {"totally_geodesic": geodesic and metric_residual <= tol,
                "max_B": max_b, "metric_residual": metric_residual}

    def screen_integrability_residual(self, p) -> float:
        """max |eta([W_i, W_j])| over screen pairs"""
        obj = self.objects(p)
        worst = 0.0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                bracket = lie_bracket(obj.screen[i], obj.screen_jac[i], obj.screen[j], obj.screen_jac[j])
                worst = max(worst, abs(float(obj.eta @ bracket)))
        return worst

    def check_screen_integrable(self, points, tol: float = 1e-6):
        """
        Raises:
            NonIntegrableScreenError: If eta([W_i, W_j]) exceeds tol somewhere
        """
        for p in points:
            value = self.screen_integrability_residual(p)
            if value > tol:
                raise NonIntegrableScreenError(
                    f"Screen is not integrable: eta([Wi, Wj]) = {value:.3e}",
                    {"point": list(map(float, p))},
                )


if __name__ == '__main__':
    from nullgeo.ambient import flat_ambient
    from nullgeo.tensor_fields import ExpressionField

    print("Testing lightlike hypersurface...")
    minkowski = flat_ambient([-1.0, 1.0, 1.0, 1.0])
    hyperplane = LightlikeHypersurface(
        minkowski,
        Embedding.from_text(["x0", "x0", "x1", "x2"], 3),
        xi=ExpressionField.from_text(["1", "0", "0"], 3),
        screen=[ExpressionField.from_text(["0", "1", "0"], 3),
                ExpressionField.from_text(["0", "0", "1"], 3)],
    )
    objects = hyperplane.objects(np.array([0.1, 0.2, 0.3]))
    print(f"✓ Induced metric diagonal: {np.diag(objects.metric)}")
    print(f"  N = {objects.transversal}")
    print(f"  max |B| = {np.max(np.abs(objects.B)):.2e}")

    print("\nHypersurface tests passed!")
