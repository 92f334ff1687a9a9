"""
Ambient Manifold

Pseudo-Riemannian manifold in one chart: metric, Levi-Civita connection,
curvature, Ricci and scalar curvature, an optional parallel complex
structure, and the residual checks used as oracles for all of them.

All curvature operators use R(X, Y) = D_[X,Y] - [D_X, D_Y].
"""

import logging
from typing import Optional, Sequence

import numpy as np

from nullgeo.error_handler import AmbientInvariantError, SingularMetricError
from nullgeo.exprcalc import ScalarField, parse
from nullgeo.tensor_fields import (
    PointwiseCache,
    curvature_tensor,
    residual,
    ricci_from_curvature,
)


logger = logging.getLogger(__name__)


MAX_CONDITION = 1e12


class AmbientManifold:
    """
    Ambient (M, g) with optional complex structure J

    Args:
        metric: dim x dim matrix of ScalarFields
        index: Number of negative eigenvalues of the metric
        complex_structure: Optional dim x dim matrix, entry [A][B] = J^A_B
    """

    def __init__(self, metric: Sequence[Sequence[ScalarField]], index: int,
                 complex_structure: Optional[Sequence[Sequence[ScalarField]]] = None):
        self.dim = len(metric)
        if any(len(row) != self.dim for row in metric):
            raise ValueError("Metric must be a square matrix")
        self.metric_components = [list(row) for row in metric]
        self.index = index
        self.complex_structure = (
            [list(row) for row in complex_structure] if complex_structure is not None else None
        )
        self._cache = PointwiseCache()
        logger.info(f"Ambient manifold: dim={self.dim}, index={index}, "
                    f"complex_structure={'yes' if complex_structure is not None else 'no'}")

    @classmethod
    def from_text(cls, metric: Sequence[Sequence[str]], index: int,
                  complex_structure: Optional[Sequence[Sequence[str]]] = None) -> 'AmbientManifold':
        dim = len(metric)
        fields = [[parse(entry, dim) for entry in row] for row in metric]
        j_fields = None
        if complex_structure is not None:
            j_fields = [[parse(entry, dim) for entry in row] for row in complex_structure]
        return cls(fields, index, j_fields)

    @property
    def is_kaehler_candidate(self) -> bool:
        return self.complex_structure is not None

    # -- metric -------------------------------------------------------------

    def metric(self, x) -> np.ndarray:
        return np.array([[c.evaluate(x) for c in row] for row in self.metric_components])

    def metric_derivative(self, x) -> np.ndarray:
        """dG[k, a, b] = d_k g_ab"""
        return np.array([
            [[c.exact_partial(k).evaluate(x) for c in row] for row in self.metric_components]
            for k in range(self.dim)
        ])

    def metric_second_derivative(self, x) -> np.ndarray:
        """d2G[k, l, a, b] = d_k d_l g_ab"""
        return np.array([
            [[[c.exact_partial(l).exact_partial(k).evaluate(x) for c in row]
              for row in self.metric_components]
             for l in range(self.dim)]
            for k in range(self.dim)
        ])

    def metric_inverse(self, x) -> np.ndarray:
        g = self.metric(x)
        if np.linalg.cond(g) > MAX_CONDITION:
            raise SingularMetricError("Ambient metric is singular",
                                      {"point": np.asarray(x, dtype=float).tolist()})
        return np.linalg.inv(g)

    # -- connection -----------------------------------------------------------

    def _koszul(self, dg: np.ndarray) -> np.ndarray:
        return 0.5 * (np.einsum('bdc->dbc', dg) + np.einsum('cdb->dbc', dg) - dg)

    def christoffel(self, x) -> np.ndarray:
        """
        Levi-Civita coefficients

        Args:
            x: Ambient point

        Returns:
            gamma[A, B, C] = Gamma^A_BC

        Raises:
            SingularMetricError: If the metric is not invertible at x
        """
        return self._cache.get_or_compute(
            'christoffel', x,
            lambda: np.einsum('ad,dbc->abc', self.metric_inverse(x), self._koszul(self.metric_derivative(x))),
        )

    def christoffel_derivative(self, x) -> np.ndarray:
        """Exact dgamma[k, A, B, C] = d_k Gamma^A_BC"""
        ginv = self.metric_inverse(x)
        dg = self.metric_derivative(x)
        d2g = self.metric_second_derivative(x)
        koszul = self._koszul(dg)
        d_koszul = 0.5 * (np.einsum('kbdc->kdbc', d2g)
                          + np.einsum('kcdb->kdbc', d2g)
                          - d2g)
        d_ginv = -np.einsum('ae,kef,fd->kad', ginv, dg, ginv)
        return (np.einsum('kad,dbc->kabc', d_ginv, koszul)
                + np.einsum('ad,kdbc->kabc', ginv, d_koszul))

    def curvature(self, x) -> np.ndarray:
        """T[a, b, c, d] = (R(d_c, d_d) d_b)^a"""
        return self._cache.get_or_compute(
            'curvature', x,
            lambda: curvature_tensor(self.christoffel(x), self.christoffel_derivative(x)),
        )

    def riemann(self, x, X, Y, Z) -> np.ndarray:
        """R(X, Y) Z in chart components"""
        return np.einsum('abcd,b,c,d->a', self.curvature(x), Z, X, Y)

    def ricci(self, x) -> np.ndarray:
        return ricci_from_curvature(self.curvature(x))

    def scalar_curvature(self, x) -> float:
        return float(np.einsum('ab,ab->', self.metric_inverse(x), self.ricci(x)))

    def is_flat(self, points, tol: float) -> bool:
        return all(float(np.max(np.abs(self.curvature(x)))) <= tol for x in points)

    # -- residual oracles ------------------------------------------------------

    def metricity_residual(self, x) -> float:
        """d_C g_AB - Gamma^E_CA g_EB - Gamma^E_CB g_AE against zero"""
        g = self.metric(x)
        gamma = self.christoffel(x)
        dg = self.metric_derivative(x)
        compat = np.einsum('eca,eb->cab', gamma, g) + np.einsum('ecb,ae->cab', gamma, g)
        return residual(dg, compat)

    def bianchi_residual(self, x, X, Y, Z) -> float:
        total = self.riemann(x, X, Y, Z) + self.riemann(x, Y, Z, X) + self.riemann(x, Z, X, Y)
        scale = (np.linalg.norm(X) * np.linalg.norm(Y) * np.linalg.norm(Z)
                 * (1.0 + float(np.max(np.abs(self.curvature(x))))))
        return float(np.max(np.abs(total))) / max(scale, 1.0)

    def holonomy_curvature(self, x, c: int, d: int, side: float = 1e-3, steps: int = 8) -> np.ndarray:
        """
        Curvature from parallel transport around a coordinate square

        The square is centred at x and spans d_c then d_d. Transport around
        it is I + side^2 R(d_c, d_d) + O(side^3); the mean over +side and
        -side drops the odd orders.

        Returns:
            Matrix M[a, b] approximating (R(d_c, d_d) d_b)^a
        """
        x = np.asarray(x, dtype=float)
        loops = [self._square_transport(x, c, d, s, steps) for s in (side, -side)]
        return (0.5 * (loops[0] + loops[1]) - np.eye(self.dim)) / side ** 2

    def _square_transport(self, x: np.ndarray, c: int, d: int, side: float, steps: int) -> np.ndarray:
        e_c = np.zeros(self.dim)
        e_d = np.zeros(self.dim)
        e_c[c] = side
        e_d[d] = side
        position = x - 0.5 * e_c - 0.5 * e_d
        frame = np.eye(self.dim)
        for edge in (e_c, e_d, -e_c, -e_d):
            frame = self._transport(position, edge, frame, steps)
            position = position + edge
        return frame

    def _transport(self, start: np.ndarray, edge: np.ndarray, frame: np.ndarray, steps: int) -> np.ndarray:
        def rhs(t: float, z: np.ndarray) -> np.ndarray:
            gamma = self.christoffel(start + t * edge)
            return -np.einsum('abc,b,cf->af', gamma, edge, z)

        dt = 1.0 / steps
        z = frame
        for i in range(steps):
            t = i * dt
            k1 = rhs(t, z)
            k2 = rhs(t + dt / 2, z + dt / 2 * k1)
            k3 = rhs(t + dt / 2, z + dt / 2 * k2)
            k4 = rhs(t + dt, z + dt * k3)
            z = z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return z

    # -- complex structure ------------------------------------------------------

    def complex_matrix(self, x) -> np.ndarray:
        if self.complex_structure is None:
            raise AmbientInvariantError("Ambient has no complex structure")
        return np.array([[c.evaluate(x) for c in row] for row in self.complex_structure])

    def complex_derivative(self, x) -> np.ndarray:
        """dJ[k, A, B] = d_k J^A_B"""
        return np.array([
            [[c.exact_partial(k).evaluate(x) for c in row] for row in self.complex_structure]
            for k in range(self.dim)
        ])

    def kaehler_residuals(self, x) -> dict:
        """
        Residuals of J^2 = -I, g(JX, JY) = g(X, Y) and nabla J = 0 at x

        (nabla_C J)^A_B = d_C J^A_B + Gamma^A_CE J^E_B - Gamma^E_CB J^A_E
        """
        j = self.complex_matrix(x)
        g = self.metric(x)
        gamma = self.christoffel(x)
        dj = self.complex_derivative(x)
        nabla_j = (dj
                   + np.einsum('ace,eb->cab', gamma, j)
                   - np.einsum('ecb,ae->cab', gamma, j))
        return {
            "square": residual(j @ j, -np.eye(self.dim)),
            "compatible": residual(j.T @ g @ j, g),
            "parallel": residual(nabla_j, np.zeros_like(nabla_j)),
        }

    # -- invariants ---------------------------------------------------------------

    def check_invariants(self, points, tol: float = 1e-8):
        """
        Verify symmetry, nondegeneracy, signature and (if present) Kaehler conditions

        Raises:
            AmbientInvariantError: On the first violated invariant
            SingularMetricError: If the metric is singular at a point
        """
        for x in points:
            g = self.metric(x)
            if residual(g, g.T) > tol:
                raise AmbientInvariantError("Ambient metric is not symmetric", {"point": list(map(float, x))})
            eigenvalues = np.linalg.eigvalsh(0.5 * (g + g.T))
            if np.min(np.abs(eigenvalues)) <= tol * max(1.0, float(np.max(np.abs(eigenvalues)))):
                raise SingularMetricError("Ambient metric is degenerate", {"point": list(map(float, x))})
            negatives = int(np.sum(eigenvalues < 0))
            if negatives != self.index:
                raise AmbientInvariantError(
                    f"Ambient metric has index {negatives}, declared {self.index}",
                    {"point": list(map(float, x)), "eigenvalues": eigenvalues.tolist()},
                )
            if self.complex_structure is not None:
                worst = max(self.kaehler_residuals(x).values())
                if worst > 1e-6:
                    raise AmbientInvariantError(
                        f"Complex structure is not Kaehler (residual {worst:.3e})",
                        {"point": list(map(float, x))},
                    )
        logger.debug(f"Ambient invariants hold at {len(points)} points")


def flat_ambient(signs: Sequence[float]) -> AmbientManifold:
    """Flat metric diag(signs)"""
    dim = len(signs)
    metric = [[repr(float(signs[a])) if a == b else "0" for b in range(dim)] for a in range(dim)]
    return AmbientManifold.from_text(metric, int(sum(1 for s in signs if s < 0)))


if __name__ == '__main__':
    print("Testing ambient manifold...")

    sphere = AmbientManifold.from_text([["1", "0"], ["0", "sin(x0)^2"]], 0)
    point = np.array([1.0, 0.3])
    print(f"✓ Scalar curvature of unit sphere: {sphere.scalar_curvature(point):.6f}")
    print(f"  metricity residual: {sphere.metricity_residual(point):.2e}")
    holonomy = sphere.holonomy_curvature(point, 0, 1)
    print(f"  holonomy gap: {np.max(np.abs(holonomy - sphere.curvature(point)[:, :, 0, 1])):.2e}")

    print("\nAmbient manifold tests passed!")
