"""
Floating-point geometry of simplices.

A k-simplex is stored as its k+1 vertices in R^m with m >= k, so facets and
vertex-subset subsimplices of a d-simplex are simplices in their own right and
all intrinsic quantities (measures, normals, dihedral angles) are computed in
the affine hull of the vertices.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import gammaln

from maxangle.errors import DegenerateSimplexError

logger = logging.getLogger(__name__)

# unit spanning-tree edges enclosing a volume below this mark a degenerate simplex
DEGENERACY_RTOL = 1e-14
# edges with a smaller relative residual add no rank to a frame
FRAME_RTOL = 1e-14


class Simplex:
    """
    Immutable k-simplex given by k+1 pairwise distinct vertices in R^m, m >= k.

    Degeneracy (vanishing measure) is a reported property, not a construction
    error; see `is_degenerate`.
    """

    __slots__ = ("_vertices",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("vertices must be a non-empty 2D array of coordinates")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")
        k = v.shape[0] - 1
        if v.shape[1] < k:
            raise ValueError(f"a {k}-simplex needs at least {k} coordinates per vertex, got {v.shape[1]}")
        if k > 0 and pdist(v).min() == 0.0:
            raise ValueError("simplex vertices must be pairwise distinct")
        v.setflags(write=False)
        self._vertices = v

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def dim(self) -> int:
        return self._vertices.shape[0] - 1

    @property
    def ambient_dim(self) -> int:
        return self._vertices.shape[1]

    def __len__(self) -> int:
        return self._vertices.shape[0]

    def __repr__(self) -> str:
        return f"Simplex(dim={self.dim}, vertices={self._vertices.tolist()})"

    def sub(self, indices) -> "Simplex":
        """Returns the subsimplex spanned by the given vertex indices (in the given order)."""
        return Simplex(self._vertices[list(indices)])

    def edges(self) -> list[tuple[int, int]]:
        """All vertex-index pairs (a, b) with a < b, in lexicographic order."""
        return list(combinations(range(len(self)), 2))

    def edge_matrix(self) -> np.ndarray:
        """m x k matrix whose columns are A_j - A_0, j = 1..k."""
        return (self._vertices[1:] - self._vertices[0]).T


@dataclass(frozen=True)
class Facet:
    """The facet F_i of `parent` opposite to vertex A_i."""

    parent: Simplex
    omitted_index: int

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(j for j in range(len(self.parent)) if j != self.omitted_index)

    @property
    def simplex(self) -> Simplex:
        return self.parent.sub(self.indices)

    @property
    def measure(self) -> float:
        return measure(self.simplex)


@dataclass(frozen=True)
class DihedralAngle:
    value: float
    facet_pair: tuple[int, int]


@dataclass(frozen=True)
class AffineFrame:
    """
    Orthonormal frame of the affine hull of a point set.

    Attributes:
        origin (np.ndarray): The first point, mapped to the frame origin
        basis (np.ndarray): m x rank matrix with orthonormal columns
        coords (np.ndarray): n x rank coordinates of the points in the frame
    """

    origin: np.ndarray
    basis: np.ndarray
    coords: np.ndarray

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class _EdgeTree:
    """
    Spanning tree of edges chosen greedily by normalized residual, with the
    orthonormal basis built from the residuals.

    Axis-aligned orthogonal edge chains (path simplices) are orthogonalized
    exactly, however short their edges are.
    """

    edges: tuple[tuple[int, int], ...]
    basis: np.ndarray
    residuals: np.ndarray
    lengths: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.edges)

    @property
    def shape_factor(self) -> float:
        """Volume of the parallelotope spanned by the unit tree edges."""
        return float(np.prod(self.residuals / self.lengths)) if self.rank else 1.0


def _edge_tree(points: np.ndarray) -> _EdgeTree:
    p = np.asarray(points, dtype=np.float64)
    n, m = p.shape
    if n < 2:
        return _EdgeTree((), np.zeros((m, 0)), np.zeros(0), np.zeros(0))

    # first edge: the longest one, ties to the smallest index pair
    pairs = list(combinations(range(n), 2))
    lengths = np.array([np.linalg.norm(p[b] - p[a]) for a, b in pairs])
    a, b = pairs[int(np.argmax(lengths))]
    first = p[b] - p[a]
    edges, basis, residuals, norms = [(a, b)], [first / lengths.max()], [lengths.max()], [lengths.max()]
    in_tree = {a, b}

    while len(in_tree) < n:
        Q = np.array(basis).T
        best = None
        for a in sorted(in_tree):
            for b in range(n):
                if b in in_tree:
                    continue
                w = p[b] - p[a]
                length = np.linalg.norm(w)
                r = w - Q @ (Q.T @ w)
                r = r - Q @ (Q.T @ r)
                score = np.linalg.norm(r) / length
                if best is None or score > best[0]:
                    best = (score, (min(a, b), max(a, b)), b, r, length)
        score, edge, b, r, length = best
        if score <= FRAME_RTOL:
            break
        residual = np.linalg.norm(r)
        edges.append(edge)
        basis.append(r / residual)
        residuals.append(residual)
        norms.append(length)
        in_tree.add(b)

    return _EdgeTree(tuple(edges), np.array(basis).T, np.array(residuals), np.array(norms))


def measure(simplex: Simplex) -> float:
    """
    k-dimensional measure sqrt(det(E^T E)) / k! of a k-simplex.

    The Gram determinant is evaluated as the product of the residual norms of
    a spanning tree of edges, which equals it exactly (tree edges and the edges
    A_j - A_0 differ by a unimodular change of basis). A 0-simplex has measure 1.
    """
    k = simplex.dim
    if k == 0:
        return 1.0
    tree = _edge_tree(simplex.vertices)
    if tree.rank < k:
        return 0.0
    return float(np.prod(tree.residuals) / math.factorial(k))


def log_measure(simplex: Simplex) -> float:
    """Natural logarithm of `measure`, -inf for a fully degenerate simplex."""
    k = simplex.dim
    if k == 0:
        return 0.0
    tree = _edge_tree(simplex.vertices)
    if tree.rank < k:
        return -math.inf
    return float(np.sum(np.log(tree.residuals)) - gammaln(k + 1))


def diameter(simplex: Simplex) -> float:
    """h_S, the largest pairwise vertex distance."""
    if simplex.dim == 0:
        return 0.0
    return float(pdist(simplex.vertices).max())


def is_degenerate(simplex: Simplex) -> bool:
    """
    True when the unit edges of the spanning tree enclose a parallelotope of
    volume below DEGENERACY_RTOL: a cutoff invariant under scaling and under
    independent rescaling of orthogonal edge chains.
    """
    k = simplex.dim
    if k == 0:
        return False
    tree = _edge_tree(simplex.vertices)
    return bool(tree.rank < k or tree.shape_factor < DEGENERACY_RTOL)


def facet(simplex: Simplex, i: int) -> Facet:
    if not 0 <= i <= simplex.dim:
        raise IndexError(f"facet index {i} out of range 0..{simplex.dim}")
    return Facet(simplex, i)


def affine_frame(points) -> AffineFrame:
    """
    Orthonormal frame of the affine hull of `points`.

    Edges are orthogonalized one at a time, pivoting on the candidate edge with
    the largest residual relative to its length, so rank-deficient inputs
    yield a frame of the numerical rank.
    """
    p = np.asarray(points, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < 2:
        raise ValueError("affine_frame needs at least 2 points")
    tree = _edge_tree(p)
    origin = p[0]
    return AffineFrame(origin=origin, basis=tree.basis, coords=(p - origin) @ tree.basis)


def barycentric_gradients(simplex: Simplex) -> np.ndarray:
    """
    Gradients of the barycentric coordinates lambda_0..lambda_k within the
    affine hull, as a (k+1) x m array of ambient vectors.

    Along a tree edge from A_a to A_b, grad(lambda_j) . (A_b - A_a) is
    delta_jb - delta_ja; the k tree edges give a square system.

    Raises:
        DegenerateSimplexError: If the simplex is below the degeneracy threshold
    """
    k = simplex.dim
    if k == 0:
        raise ValueError("a 0-simplex has no barycentric gradients")
    tree = _edge_tree(simplex.vertices)
    if tree.rank < k or tree.shape_factor < DEGENERACY_RTOL:
        raise DegenerateSimplexError(f"degenerate {k}-simplex: normals and gradients are undefined")
    v = simplex.vertices
    W = np.array([(v[b] - v[a]) @ tree.basis for a, b in tree.edges])
    D = np.zeros((k, k + 1))
    for t, (a, b) in enumerate(tree.edges):
        D[t, a] = -1.0
        D[t, b] = 1.0
    return (tree.basis @ np.linalg.solve(W, D)).T


def outward_normals(simplex: Simplex) -> np.ndarray:
    """
    Outward unit normals n_0..n_k of the facets F_0..F_k, as a (k+1) x m array.

    n_i lies in the affine hull of the simplex and points away from A_i.

    Raises:
        DegenerateSimplexError: If the simplex is below the degeneracy threshold
    """
    grads = barycentric_gradients(simplex)
    return -grads / np.linalg.norm(grads, axis=1, keepdims=True)


def dihedral_angle_matrix(simplex: Simplex) -> np.ndarray:
    """Symmetric (k+1) x (k+1) matrix of dihedral angles beta_ij (diagonal is 0)."""
    n = outward_normals(simplex)
    angles = np.arccos(np.clip(-(n @ n.T), -1.0, 1.0))
    np.fill_diagonal(angles, 0.0)
    return angles


def dihedral_angle(simplex: Simplex, i: int, j: int) -> DihedralAngle:
    """
    Dihedral angle between facets F_i and F_j, cos(beta_ij) = -n_i . n_j.

    For a triangle this is the planar angle at the vertex shared by F_i and F_j.
    """
    size = len(simplex)
    if not (0 <= i < size and 0 <= j < size):
        raise IndexError(f"facet indices ({i}, {j}) out of range 0..{simplex.dim}")
    if i == j:
        raise ValueError("a dihedral angle needs two distinct facets")
    n = outward_normals(simplex)
    value = math.acos(min(1.0, max(-1.0, -float(n[i] @ n[j]))))
    return DihedralAngle(value=value, facet_pair=(i, j))


def regular_simplex(d: int, side: float = 1.0) -> Simplex:
    """Regular d-simplex in R^d with the given edge length."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    # vertices of the standard simplex in R^{d+1} have pairwise distance sqrt(2)
    frame = affine_frame(np.eye(d + 1) * (side / math.sqrt(2.0)))
    return Simplex(frame.coords)


def regular_dihedral(d: int) -> float:
    """gamma_1 = arccos(1/d), the dihedral angle of the regular d-simplex."""
    if d < 2:
        raise ValueError(f"dihedral angles need d >= 2, got {d}")
    return math.acos(1.0 / d)


def planar_angles(triangle: Simplex) -> np.ndarray:
    """Interior angles of a triangle at A_0, A_1, A_2 from normalized edge dot products."""
    if triangle.dim != 2:
        raise ValueError(f"planar angles need a triangle, got a {triangle.dim}-simplex")
    v = triangle.vertices
    angles = np.empty(3)
    for k in range(3):
        a = v[(k + 1) % 3] - v[k]
        b = v[(k + 2) % 3] - v[k]
        cos = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        angles[k] = math.acos(min(1.0, max(-1.0, float(cos))))
    return angles
