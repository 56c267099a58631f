"""
Eriksson's d-dimensional sine.

sin_d(A_i | A_0 ... A_d) = d^{d-1} (meas_d S)^{d-1} / ((d-1)! prod_{j != i} meas_{d-1} F_j)

evaluated at simplex vertices, on tuples of unit vectors (with the value 0 on
linearly dependent tuples), and through the product formula over dihedral
angles.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from maxangle.geometry import (
    Simplex,
    affine_frame,
    is_degenerate,
    log_measure,
    outward_normals,
)

logger = logging.getLogger(__name__)

# smallest singular value below which unit vectors count as linearly dependent
RANK_TOL = 1e-12
UNIT_NORM_TOL = 1e-12
# clamping by more than this (relative) is flagged on the returned value
CLAMP_FLAG_RTOL = 1e-6


@dataclass(frozen=True)
class SineValue:
    value: float
    rank_deficient: bool = False
    clamped: bool = False

    def __float__(self) -> float:
        return self.value


ZERO_SINE = SineValue(0.0, rank_deficient=True)


@dataclass(frozen=True, eq=False)
class UnitVectorTuple:
    """
    Ordered tuple of d unit vectors in R^d, stored as the rows of a d x d array.

    Use `UnitVectorTuple.from_vectors` to normalize arbitrary nonzero vectors.
    """

    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"expected d unit vectors in R^d, got array of shape {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise ValueError(f"vectors must have unit norm, got norms {norms.tolist()}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def from_vectors(cls, vectors) -> "UnitVectorTuple":
        v = np.asarray(vectors, dtype=np.float64)
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("zero vectors have no direction")
        return cls(v / norms)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def is_rank_deficient(self) -> bool:
        return bool(np.linalg.svd(self.vectors, compute_uv=False).min() < RANK_TOL)


def _clamped(value: float) -> SineValue:
    if value > 1.0:
        flagged = value - 1.0 > CLAMP_FLAG_RTOL
        if flagged:
            logger.warning("sin_d evaluated to %.17g > 1; clamped to 1", value)
        return SineValue(1.0, clamped=flagged)
    return SineValue(max(value, 0.0))


def sin_d_at_vertex(simplex: Simplex, i: int) -> SineValue:
    """
    d-sine of the vertex angle at A_i.

    Facets F_j, j != i, are the facets through A_i. A degenerate simplex gives 0
    with `rank_deficient` set.

    Args:
        simplex (Simplex): A d-simplex, d >= 2, possibly embedded in a higher dimension
        i (int): Vertex index

    Returns:
        SineValue: Value clamped to [0, 1]
    """
    d = simplex.dim
    if d < 2:
        raise ValueError(f"sin_d needs d >= 2, got d = {d}")
    if not 0 <= i <= d:
        raise IndexError(f"vertex index {i} out of range 0..{d}")
    if is_degenerate(simplex):
        return ZERO_SINE

    others = [j for j in range(d + 1) if j != i]
    facets = [simplex.sub([k for k in range(d + 1) if k != j]) for j in others]

    # measure**(d-1) and the facet product leave the float range long before the ratio does
    log_value = (
        (d - 1) * math.log(d)
        + (d - 1) * log_measure(simplex)
        - gammaln(d)
        - sum(log_measure(f) for f in facets)
    )
    return _clamped(math.exp(min(log_value, 1.0)))


def _origin_simplex(vectors: np.ndarray) -> Simplex:
    return Simplex(np.vstack([np.zeros(vectors.shape[1]), vectors]))


def sin_d_of_vectors(unit_vectors: UnitVectorTuple) -> SineValue:
    """
    sin_d on a tuple of unit vectors: the measure ratio on conv{0, t_1, ..., t_d} at the
    origin when the vectors span R^d, otherwise 0 with `rank_deficient` set.
    """
    if unit_vectors.dim < 2:
        raise ValueError(f"sin_d needs d >= 2, got d = {unit_vectors.dim}")
    if unit_vectors.is_rank_deficient():
        return ZERO_SINE
    return sin_d_at_vertex(_origin_simplex(unit_vectors.vectors), 0)


def sin_d_via_product(simplex: Simplex, i: int, pivot: int) -> SineValue:
    """
    Right-hand side of the product formula

        sin_d(A_i | S) = sin_{d-1}(A_i | F_pivot) * prod_{j != i, pivot} sin(beta_{j, pivot})

    where F_pivot is evaluated in its own affine frame and sin_1 is taken as 1.

    Raises:
        DegenerateSimplexError: If the simplex is degenerate
    """
    d = simplex.dim
    if d < 2:
        raise ValueError(f"sin_d needs d >= 2, got d = {d}")
    for name, index in (("vertex", i), ("pivot", pivot)):
        if not 0 <= index <= d:
            raise IndexError(f"{name} index {index} out of range 0..{d}")
    if i == pivot:
        raise ValueError("the angle vertex and the pivot must differ")

    n = outward_normals(simplex)
    remaining = [k for k in range(d + 1) if k != pivot]
    if d == 2:
        lower = 1.0
    else:
        opposite = Simplex(affine_frame(simplex.vertices[remaining]).coords)
        lower = sin_d_at_vertex(opposite, remaining.index(i)).value
    # sin(beta_jp) as the length of n_j projected off n_p, accurate near 0 and pi
    product = math.prod(
        float(np.linalg.norm(n[j] - (n[j] @ n[pivot]) * n[pivot])) for j in remaining if j != i
    )
    return _clamped(lower * product)


def max_sine_over_vertices(simplex: Simplex) -> SineValue:
    if is_degenerate(simplex):
        return ZERO_SINE
    return max((sin_d_at_vertex(simplex, i) for i in range(simplex.dim + 1)), key=lambda s: s.value)


def parallelotope_measure(unit_vectors: UnitVectorTuple) -> float:
    """|det| of the unit vectors: the measure of the parallelotope they span."""
    return float(abs(np.linalg.det(unit_vectors.vectors)))


def batch_sin_d(vectors: np.ndarray) -> np.ndarray:
    """
    sin_d for a batch of d-tuples of unit vectors, shape (B, d, d) with vectors
    as rows, through the common-vertex form of the measure ratio:

        sin_d(t_1..t_d) = |det T|^{d-1} / prod_j vol_{d-1}(T without t_j)

    Rank-deficient tuples (smallest singular value < RANK_TOL) give 0.
    """
    T = np.asarray(vectors, dtype=np.float64)
    if T.ndim == 2:
        T = T[np.newaxis]
    B, d, _ = T.shape
    result = np.zeros(B)
    if B == 0:
        return result
    independent = np.linalg.svd(T, compute_uv=False).min(axis=1) >= RANK_TOL
    if not np.any(independent):
        return result
    T = T[independent]

    _, log_det = np.linalg.slogdet(T)
    log_value = (d - 1) * log_det
    for j in range(d):
        rest = np.delete(T, j, axis=1)
        sign, log_gram = np.linalg.slogdet(rest @ rest.transpose(0, 2, 1))
        log_gram = np.where(sign > 0, log_gram, -np.inf)
        log_value = log_value - 0.5 * log_gram
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.exp(log_value)
    values = np.where(np.isfinite(values), values, 1.0)
    result[independent] = np.clip(values, 0.0, 1.0)
    return result


def sin_d_closed_form(unit_vectors: UnitVectorTuple) -> float:
    """Single-tuple form of `batch_sin_d`."""
    return float(batch_sin_d(unit_vectors.vectors)[0])
