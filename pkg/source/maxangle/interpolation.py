"""
Linear Lagrange interpolation on a simplex and empirical estimates of the
constant C in

    ||v - pi_S v||_{1,inf} <= C h_S |v|_{2,inf}

with ||w||_{1,inf} = max(sup |w|, sup max_k |d_k w|) and |v|_{2,inf} the sup of
the largest second derivative, both taken over S. Sups are approximated on a
barycentric lattice.
"""

import logging
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Callable, List

import numpy as np

from maxangle.geometry import Simplex, barycentric_gradients, diameter

logger = logging.getLogger(__name__)

DEFAULT_LATTICE_ORDER = 20


@dataclass(frozen=True)
class AffineFunction:
    gradient: np.ndarray
    offset: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Values at the rows of `points` (a single point gives a scalar)."""
        return np.asarray(points, dtype=np.float64) @ self.gradient + self.offset


@dataclass(frozen=True)
class TestFunction:
    """
    A C^2 function with its gradient and the exact sup of its second derivatives.

    Attributes:
        name (str): Label used in reports
        evaluator (Callable): Maps an (N, d) array of points to N values
        gradient (Callable): Maps an (N, d) array of points to (N, d) gradients
        hessian_sup (float): max_{k,l} |d_k d_l v| over the simplex (0 for affine v)
    """

    __test__ = False

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian_sup: float

    def __post_init__(self):
        if self.hessian_sup < 0.0:
            raise ValueError(f"hessian_sup must be non-negative, got {self.hessian_sup}")


@dataclass(frozen=True)
class InterpolationError:
    sup_value_err: float
    sup_gradient_err: float

    @property
    def norm(self) -> float:
        """||v - pi_S v||_{1,inf}."""
        return max(self.sup_value_err, self.sup_gradient_err)


def _monomial(d: int, k: int, l: int) -> TestFunction:
    """x_k * x_l (x_k^2 when k == l)."""

    def evaluator(x):
        return x[:, k] * x[:, l]

    def gradient(x):
        g = np.zeros_like(x)
        g[:, k] += x[:, l]
        g[:, l] += x[:, k]
        return g

    name = f"x{k + 1}^2" if k == l else f"x{k + 1}*x{l + 1}"
    return TestFunction(name, evaluator, gradient, 2.0 if k == l else 1.0)


def _affine(d: int, coefficients: np.ndarray, constant: float, name: str) -> TestFunction:
    c = np.asarray(coefficients, dtype=np.float64)

    def evaluator(x):
        return x @ c + constant

    def gradient(x):
        return np.broadcast_to(c, x.shape).copy()

    return TestFunction(name, evaluator, gradient, 0.0)


def default_suite(d: int) -> List[TestFunction]:
    """All quadratic monomials x_k^2 and x_k x_l, k < l; their Hessians are constant."""
    return [_monomial(d, k, l) for k, l in combinations_with_replacement(range(d), 2)]


def affine_suite(d: int) -> List[TestFunction]:
    """The constant 1 and the coordinates x_1..x_d."""
    suite = [_affine(d, np.zeros(d), 1.0, "1")]
    suite += [_affine(d, np.eye(d)[k], 0.0, f"x{k + 1}") for k in range(d)]
    return suite


def lagrange_interpolant(simplex: Simplex, vertex_values) -> AffineFunction:
    """
    The affine function taking `vertex_values` at the vertices, assembled in
    barycentric form sum_j v_j lambda_j.

    Raises:
        DegenerateSimplexError: If the simplex is degenerate
    """
    d = simplex.dim
    if simplex.ambient_dim != d:
        raise ValueError(f"interpolation needs a {d}-simplex in R^{d}, got ambient dimension {simplex.ambient_dim}")
    values = np.asarray(vertex_values, dtype=np.float64)
    if values.shape != (d + 1,):
        raise ValueError(f"expected {d + 1} vertex values, got shape {values.shape}")
    gradient = values @ barycentric_gradients(simplex)
    offset = float(values[0] - gradient @ simplex.vertices[0])
    return AffineFunction(gradient=gradient, offset=offset)


def barycentric_lattice(d: int, order: int) -> np.ndarray:
    """
    All barycentric points alpha / order with alpha a multi-index of d+1
    non-negative integers summing to `order`, as rows.
    """
    if order < 1:
        raise ValueError(f"lattice order must be >= 1, got {order}")
    # stars and bars: d bar positions among order + d slots
    rows = []
    for bars in combinations(range(order + d), d):
        edges = (-1,) + bars + (order + d,)
        rows.append([edges[k + 1] - edges[k] - 1 for k in range(d + 1)])
    return np.array(rows, dtype=np.float64) / order


def interpolation_error(simplex: Simplex, v: TestFunction,
                        lattice_order: int = DEFAULT_LATTICE_ORDER) -> InterpolationError:
    """
    Sups of |v - pi_S v| and of max_k |d_k (v - pi_S v)| over the barycentric
    lattice of the given order.

    Raises:
        DegenerateSimplexError: If the simplex is degenerate
    """
    if lattice_order < 2:
        raise ValueError(f"lattice order must be >= 2, got {lattice_order}")
    vertices = simplex.vertices
    interpolant = lagrange_interpolant(simplex, v.evaluator(vertices))
    points = barycentric_lattice(simplex.dim, lattice_order) @ vertices
    value_err = np.abs(v.evaluator(points) - interpolant(points)).max()
    gradient_err = np.abs(v.gradient(points) - interpolant.gradient).max()
    return InterpolationError(sup_value_err=float(value_err), sup_gradient_err=float(gradient_err))


def _ratios(simplex: Simplex, suite: List[TestFunction], lattice_order: int) -> tuple[float, float]:
    if not suite:
        raise ValueError("the test suite is empty")
    h = diameter(simplex)
    full, gradient_only = 0.0, 0.0
    for v in suite:
        if v.hessian_sup == 0.0:
            # reproduced exactly up to rounding, which grows with the distance from the origin
            continue
        err = interpolation_error(simplex, v, lattice_order)
        full = max(full, err.norm / (h * v.hessian_sup))
        gradient_only = max(gradient_only, err.sup_gradient_err / (h * v.hessian_sup))
    logger.debug("interpolation ratio %.6g, gradient part %.6g, h = %.6g", full, gradient_only, h)
    return full, gradient_only


def interpolation_ratio(simplex: Simplex, suite: List[TestFunction],
                        lattice_order: int = DEFAULT_LATTICE_ORDER) -> float:
    """
    max over the suite of ||v - pi_S v||_{1,inf} / (h_S |v|_{2,inf}): a lower
    estimate of the best constant C for this simplex. Affine members give 0.
    """
    return _ratios(simplex, suite, lattice_order)[0]


def gradient_ratio(simplex: Simplex, suite: List[TestFunction],
                   lattice_order: int = DEFAULT_LATTICE_ORDER) -> float:
    """As `interpolation_ratio` with the gradient part of the norm only; invariant under scaling."""
    return _ratios(simplex, suite, lattice_order)[1]
