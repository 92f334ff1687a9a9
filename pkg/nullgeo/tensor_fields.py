"""
Tensor Fields

Component fields over a chart (vector fields, covector fields and derived
pointwise quantities), fourth-order finite differences for quantities that
are not expressions, and small pointwise tensor helpers shared by the
geometry modules.

Index conventions:
    jacobian(p)[a, b] = d_a X^b
    gamma[c, a, b]    = coefficient of d_c in D_{d_a} d_b
"""

import logging
import threading
from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Callable, Hashable, List, Optional, Sequence

import numpy as np

from nullgeo.exprcalc import ScalarField, parse


logger = logging.getLogger(__name__)


DEFAULT_DERIVED_STEP = 1e-3


def fd_derivative(func: Callable[[np.ndarray], np.ndarray], p, h: float = DEFAULT_DERIVED_STEP) -> np.ndarray:
    """
    Fourth-order central difference of an array-valued function

    Args:
        func: Pointwise function returning an array of any shape
        p: Point
        h: Step

    Returns:
        Array of shape (dim,) + func(p).shape, first axis is the direction
    """
    p = np.asarray(p, dtype=float)
    derivatives = []
    for a in range(p.shape[0]):
        step = np.zeros_like(p)
        step[a] = h
        f_p2 = np.asarray(func(p + 2 * step), dtype=float)
        f_p1 = np.asarray(func(p + step), dtype=float)
        f_m1 = np.asarray(func(p - step), dtype=float)
        f_m2 = np.asarray(func(p - 2 * step), dtype=float)
        derivatives.append((-f_p2 + 8 * f_p1 - 8 * f_m1 + f_m2) / (12 * h))
    return np.array(derivatives)


class ComponentField(ABC):
    """Field given by its components in chart coordinates"""

    dim: int

    @abstractmethod
    def value(self, p) -> np.ndarray:
        """Components at p"""
        pass

    @abstractmethod
    def jacobian(self, p) -> np.ndarray:
        """Partials of the components at p, jac[a, b] = d_a X^b"""
        pass


class ExpressionField(ComponentField):
    """Component field with expression components and exact partials"""

    def __init__(self, components: Sequence[ScalarField]):
        if not components:
            raise ValueError("Field needs at least one component")
        self.components = list(components)
        self.dim = self.components[0].dim

    @classmethod
    def from_text(cls, texts: Sequence[str], dim: int) -> 'ExpressionField':
        return cls([parse(t, dim) for t in texts])

    def value(self, p) -> np.ndarray:
        return np.array([c.evaluate(p) for c in self.components], dtype=float)

    def jacobian(self, p) -> np.ndarray:
        return np.array([
            [c.exact_partial(a).evaluate(p) for c in self.components]
            for a in range(self.dim)
        ], dtype=float)

    def to_text(self) -> List[str]:
        return [c.to_text() for c in self.components]


class CallableField(ComponentField):
    """
    Component field given by a pointwise function

    Partials come from the supplied jacobian function when there is one,
    otherwise from fourth-order central differences.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], dim: int,
                 jacobian_func: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 step: float = DEFAULT_DERIVED_STEP):
        self.func = func
        self.dim = dim
        self.jacobian_func = jacobian_func
        self.step = step

    def value(self, p) -> np.ndarray:
        return np.asarray(self.func(np.asarray(p, dtype=float)), dtype=float)

    def jacobian(self, p) -> np.ndarray:
        if self.jacobian_func is not None:
            return np.asarray(self.jacobian_func(np.asarray(p, dtype=float)), dtype=float)
        return fd_derivative(self.func, p, self.step)


class AffineField(CallableField):
    """X(p) = offset + matrix @ (p - base); used for random test fields with exact brackets"""

    def __init__(self, offset: np.ndarray, matrix: np.ndarray, base: np.ndarray):
        self.offset = np.asarray(offset, dtype=float)
        self.matrix = np.asarray(matrix, dtype=float)
        self.base = np.asarray(base, dtype=float)
        super().__init__(
            lambda p: self.offset + self.matrix @ (p - self.base),
            self.base.shape[0],
            jacobian_func=lambda p: self.matrix.T.copy(),
        )

    @classmethod
    def random(cls, rng: np.random.Generator, base: np.ndarray) -> 'AffineField':
        dim = base.shape[0]
        return cls(rng.standard_normal(dim), 0.5 * rng.standard_normal((dim, dim)), base)


def lie_bracket(x_value: np.ndarray, x_jac: np.ndarray,
                y_value: np.ndarray, y_jac: np.ndarray) -> np.ndarray:
    """[X, Y]^c = X^a d_a Y^c - Y^a d_a X^c"""
    return x_value @ y_jac - y_value @ x_jac


def covariant_derivative(gamma: np.ndarray, field_value: np.ndarray,
                         field_jac: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """(D_v X)^c = v^a (d_a X^c + gamma[c, a, b] X^b)"""
    return direction @ field_jac + np.einsum('cab,a,b->c', gamma, direction, field_value)


def covariant_derivative_all(gamma: np.ndarray, field_value: np.ndarray,
                             field_jac: np.ndarray) -> np.ndarray:
    """Matrix out[a, c] = (D_{d_a} X)^c"""
    return field_jac + np.einsum('cab,b->ac', gamma, field_value)


def covector_derivative_all(gamma: np.ndarray, form_value: np.ndarray,
                            form_jac: np.ndarray) -> np.ndarray:
    """Matrix out[a, b] = (D_{d_a} w)(d_b) = d_a w_b - gamma[e, a, b] w_e"""
    return form_jac - np.einsum('eab,e->ab', gamma, form_value)


def bilinear_derivative_all(gamma: np.ndarray, tensor: np.ndarray,
                            tensor_jac: np.ndarray) -> np.ndarray:
    """out[a, b, c] = (D_{d_a} T)(d_b, d_c) for a (0,2)-tensor T"""
    return (tensor_jac
            - np.einsum('eab,ec->abc', gamma, tensor)
            - np.einsum('eac,be->abc', gamma, tensor))


def curvature_tensor(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """
    Curvature of a connection in the convention R(X, Y) = D_[X,Y] - [D_X, D_Y]

    Args:
        gamma: gamma[c, a, b]
        dgamma: dgamma[k, c, a, b] = d_k gamma[c, a, b]

    Returns:
        T with T[a, b, c, d] = (R(d_c, d_d) d_b)^a
    """
    standard = (np.einsum('cadb->abcd', dgamma)
                - np.einsum('dacb->abcd', dgamma)
                + np.einsum('ace,edb->abcd', gamma, gamma)
                - np.einsum('ade,ecb->abcd', gamma, gamma))
    return -standard


def ricci_from_curvature(curvature: np.ndarray) -> np.ndarray:
    """Ric(d_c, d_b) = trace of Z -> R(d_c, Z) d_b"""
    return np.einsum('abca->cb', curvature)


def wedge_apply(metric: np.ndarray, a: np.ndarray, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """(A wedge X)(Z) = g(A, Z) X - g(X, Z) A"""
    return (a @ metric @ z) * x - (x @ metric @ z) * a


def residual(lhs, rhs) -> float:
    """Scaled gap |lhs - rhs| / (1 + max(|lhs|, |rhs|)) in the max norm"""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    gap = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0
    scale = max(float(np.max(np.abs(lhs))) if lhs.size else 0.0,
                float(np.max(np.abs(rhs))) if rhs.size else 0.0)
    return gap / (1.0 + scale)


class PointwiseCache:
    """Bounded LRU cache keyed by (name, point) for pointwise kits"""

    def __init__(self, max_entries: int = 4096):
        self.max_entries = max_entries
        self._entries: 'OrderedDict[Hashable, object]' = OrderedDict()
        self._lock = threading.Lock()

    @staticmethod
    def key(name: str, p) -> Hashable:
        return (name, np.asarray(p, dtype=float).tobytes())

    def get_or_compute(self, name: str, p, compute: Callable[[], object]):
        key = self.key(name, p)
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                return self._entries[key]
        value = compute()
        with self._lock:
            self._entries[key] = value
            while len(self._entries) > self.max_entries:
                self._entries.popitem(last=False)
        return value

    def clear(self):
        with self._lock:
            self._entries.clear()
