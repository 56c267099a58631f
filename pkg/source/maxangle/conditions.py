"""
Executable forms of the angle conditions on a single simplex.

    min_angle  generalized minimum angle condition: every vertex d-sine >= C
    max_angle  generalized maximum angle condition: some d edges have d-sine >= C
    dihedral   d-dimensional maximum angle condition: every dihedral angle of
               every vertex-subset subsimplex <= gamma0
    jamet      Jamet's condition: some d edge directions have theta <= theta0

The conditions are statements about families; here each one is reduced to the
extremal quantity of one simplex, and thresholds are inputs.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from maxangle.errors import DegenerateSimplexError, ThresholdError
from maxangle.geometry import (
    Simplex,
    affine_frame,
    dihedral_angle_matrix,
    is_degenerate,
    planar_angles,
    regular_dihedral,
)
from maxangle.sine import RANK_TOL, UnitVectorTuple, batch_sin_d, sin_d_at_vertex

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12
CONDITION_NAMES = ("min_angle", "max_angle", "dihedral", "jamet")
# multi-start search parameters for jamet_theta(method="multistart")
JAMET_SAMPLES = 4096
JAMET_STARTS = 16
JAMET_STEP_TOL = 1e-10
JAMET_SEED = 0


@dataclass(frozen=True)
class Thresholds:
    """gamma0 in (0, pi), min_sine (C) > 0, theta0 in (0, pi/2)."""

    gamma0: float = 3.0
    min_sine: float = 1e-3
    theta0: float = 1.5

    def __post_init__(self):
        if not 0.0 < self.gamma0 < math.pi:
            raise ThresholdError(f"gamma0 must lie in (0, pi), got {self.gamma0}")
        if not self.min_sine > 0.0:
            raise ThresholdError(f"C must be positive, got {self.min_sine}")
        if not 0.0 < self.theta0 < math.pi / 2:
            raise ThresholdError(f"theta0 must lie in (0, pi/2), got {self.theta0}")


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class EdgeSelection:
    """
    d oriented edges of a simplex and the unit vectors along them.

    Attributes:
        edges (tuple): Vertex-index pairs (a, b), a < b; vector i points from A_a to A_b
            times signs[i]
        signs (tuple): Orientation of each edge, +1 or -1
        vectors (UnitVectorTuple): Normalized oriented edge vectors
    """

    edges: tuple[tuple[int, int], ...]
    signs: tuple[int, ...]
    vectors: UnitVectorTuple


@dataclass(frozen=True)
class SubsimplexId:
    vertex_indices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertex_indices) < 3:
            raise ValueError("subsimplices with dihedral angles have at least 3 vertices")
        if tuple(sorted(set(self.vertex_indices))) != tuple(self.vertex_indices):
            raise ValueError(f"vertex indices must be sorted and distinct, got {self.vertex_indices}")


@dataclass(frozen=True)
class DihedralWitness:
    """Subsimplex and the two facets (named by their opposite global vertices) attaining the maximum."""

    subsimplex: SubsimplexId
    facet_pair: tuple[int, int]


@dataclass(frozen=True)
class ConditionVerdict:
    name: str
    quantity: float
    threshold: float
    satisfied: bool
    witness: object = None


@dataclass
class AngleReport:
    """All quality quantities of one simplex and the verdict of every condition."""

    min_vertex_sine: float
    best_edge_sine: float
    max_dihedral: float
    jamet_theta: float
    verdicts: dict[str, ConditionVerdict] = field(default_factory=dict)
    degenerate: bool = False

    @property
    def satisfied(self) -> bool:
        return all(v.satisfied for v in self.verdicts.values())

    def as_dict(self) -> dict:
        return {
            "min_vertex_sine": self.min_vertex_sine,
            "best_edge_sine": self.best_edge_sine,
            "max_dihedral": self.max_dihedral,
            "jamet_theta": self.jamet_theta,
            "degenerate": self.degenerate,
            "verdicts": {name: v.satisfied for name, v in self.verdicts.items()},
        }


def _require_dim(simplex: Simplex) -> int:
    d = simplex.dim
    if d < 2:
        raise ValueError(f"angle conditions need d >= 2, got d = {d}")
    return d


def _intrinsic_vertices(simplex: Simplex) -> np.ndarray:
    if simplex.ambient_dim == simplex.dim:
        return simplex.vertices
    frame = affine_frame(simplex.vertices)
    if frame.rank < simplex.dim:
        # flat embedded input, pad so that edge tuples stay d x d (and rank deficient)
        pad = np.zeros((len(simplex), simplex.dim - frame.rank))
        return np.hstack([frame.coords, pad])
    return frame.coords


def edge_unit_vectors(simplex: Simplex) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Edges in lexicographic order and the unit vectors A_b - A_a along them, in the simplex's own frame."""
    v = _intrinsic_vertices(simplex)
    edges = simplex.edges()
    vectors = np.array([v[b] - v[a] for a, b in edges])
    return edges, vectors / np.linalg.norm(vectors, axis=1, keepdims=True)


def _selection(edges, vectors, subset) -> EdgeSelection:
    return EdgeSelection(
        edges=tuple(edges[k] for k in subset),
        signs=(1,) * len(subset),
        vectors=UnitVectorTuple(vectors[list(subset)]),
    )


def _first_within(values: np.ndarray, target: float) -> int:
    return int(np.flatnonzero(np.abs(values - target) <= TIE_TOL)[0])


def min_vertex_sine(simplex: Simplex) -> float:
    """min_i sin_d(A_i | S): the quantity bounded below by C in the minimum angle condition."""
    d = _require_dim(simplex)
    if is_degenerate(simplex):
        return 0.0
    return min(sin_d_at_vertex(simplex, i).value for i in range(d + 1))


def best_edge_sine(simplex: Simplex) -> tuple[float, EdgeSelection]:
    """
    Maximum d-sine over all choices of d edges of the simplex.

    sin_d is unchanged when a vector is multiplied by any nonzero constant, so
    orientations do not matter and every subset is evaluated once; the witness
    carries orientation +1 on every edge. Ties within 1e-12 go to the
    lexicographically smallest edge-index tuple.

    Returns:
        tuple: (value, EdgeSelection attaining it)
    """
    d = _require_dim(simplex)
    edges, vectors = edge_unit_vectors(simplex)
    subsets = np.array(list(combinations(range(len(edges)), d)))
    values = batch_sin_d(vectors[subsets])
    best = float(values.max())
    k = _first_within(values, best)
    return best, _selection(edges, vectors, subsets[k])


def max_subsimplex_dihedral(simplex: Simplex) -> tuple[float, SubsimplexId, tuple[int, int]]:
    """
    Largest dihedral angle over every subsimplex S' of dimension 2..d.

    Triangles contribute their planar angles. Each S' is measured in its own
    affine frame. The facet pair is reported by the global indices of the
    vertices opposite to the two facets.

    Raises:
        DegenerateSimplexError: If some subsimplex is degenerate; `subsimplex`
            names it
    """
    d = _require_dim(simplex)
    best, witness = -1.0, None
    for k in range(2, d + 1):
        for subset in combinations(range(d + 1), k + 1):
            sub = simplex.sub(subset)
            if is_degenerate(sub):
                raise DegenerateSimplexError(f"degenerate subsimplex {subset}", subsimplex=subset)
            try:
                angles = dihedral_angle_matrix(sub)
            except DegenerateSimplexError as e:
                raise DegenerateSimplexError(str(e), subsimplex=subset) from e
            i, j = np.unravel_index(int(np.argmax(angles)), angles.shape)
            value = float(angles[i, j])
            if value > best + TIE_TOL:
                best = value
                pair = (subset[min(i, j)], subset[max(i, j)])
                witness = (SubsimplexId(subset), pair)
    return best, witness[0], witness[1]


def krizek_angles(simplex: Simplex) -> tuple[float, float]:
    """
    (gamma_D, gamma_F) of a tetrahedron: the largest dihedral angle between its
    faces and the largest angle of its four triangular faces.
    """
    if simplex.dim != 3:
        raise ValueError(f"Krizek's angles are defined for tetrahedra, got d = {simplex.dim}")
    gamma_d = float(dihedral_angle_matrix(simplex).max())
    gamma_f = max(float(planar_angles(simplex.sub(face)).max()) for face in combinations(range(4), 3))
    return gamma_d, gamma_f


def max_planar_angle(triangle: Simplex) -> float:
    """Synge's gamma_T, the largest angle of a triangle."""
    return float(planar_angles(triangle).max())


def _sign_vectors(d: int) -> np.ndarray:
    # global sign quotiented out: s_0 = +1
    rest = np.array(list(product((1.0, -1.0), repeat=d - 1))).reshape(-1, d - 1)
    return np.hstack([np.ones((rest.shape[0], 1)), rest])


def _batch_jamet_theta(vectors: np.ndarray) -> np.ndarray:
    """
    Exact Jamet angles for a batch of tuples (B, d, d).

    min over unit u of max_i |e_i . u| is 1 / max |u| over the parallelotope
    {u : |e_i . u| <= 1}, whose vertices are E^{-1} s for sign vectors s.
    """
    E = np.asarray(vectors, dtype=np.float64)
    B, d, _ = E.shape
    theta = np.full(B, math.pi / 2)
    independent = np.linalg.svd(E, compute_uv=False).min(axis=1) >= RANK_TOL
    if not np.any(independent):
        return theta
    signs = _sign_vectors(d)
    U = np.linalg.solve(E[independent], np.broadcast_to(signs.T, (int(independent.sum()), d, signs.shape[0])))
    radius = np.linalg.norm(U, axis=1).max(axis=1)
    theta[independent] = np.arccos(np.clip(1.0 / radius, 0.0, 1.0))
    return theta


def _sphere_samples(d: int, count: int) -> np.ndarray:
    if d == 2:
        phi = np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if d == 3:
        # Fibonacci points on the upper hemisphere (theta_i only sees lines)
        k = np.arange(count) + 0.5
        z = k / count
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + math.sqrt(5.0)) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.default_rng(JAMET_SEED)
    u = rng.standard_normal((count, d))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def _worst_alignment(E: np.ndarray, u: np.ndarray) -> np.ndarray:
    """max_i |e_i . u| / |u| for the rows of u."""
    return np.abs(u @ E.T).max(axis=1) / np.linalg.norm(u, axis=1)


def _multistart_theta(E: np.ndarray) -> float:
    d = E.shape[0]
    samples = _sphere_samples(d, JAMET_SAMPLES)
    scores = _worst_alignment(E, samples)
    starts = samples[np.argsort(scores, kind="stable")[:JAMET_STARTS]]

    # pattern directions E^{-1} w, w in {-1, 0, 1}^d: each one moves the
    # alignments e_i . u by exactly w_i
    w = np.array([p for p in product((-1.0, 0.0, 1.0), repeat=d) if any(p)])
    directions = np.linalg.solve(E, w.T).T
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    best = math.inf
    for u in starts:
        value = float(_worst_alignment(E, u[np.newaxis])[0])
        radius = 0.5 / math.sqrt(JAMET_SAMPLES ** (1.0 / (d - 1)))
        while radius >= JAMET_STEP_TOL:
            trials = u + radius * directions
            trials /= np.linalg.norm(trials, axis=1, keepdims=True)
            trial_values = _worst_alignment(E, trials)
            k = int(np.argmin(trial_values))
            if trial_values[k] < value:
                u, value = trials[k], float(trial_values[k])
            else:
                radius /= 2
        best = min(best, value)
    return math.acos(min(1.0, best))


def jamet_theta(unit_vectors: UnitVectorTuple, method: str = "exact") -> float:
    """
    Jamet's angle theta = max over unit u of min_i angle(u, line through e_i).

    Args:
        unit_vectors (UnitVectorTuple): The directions e_1..e_d
        method (str): 'exact' enumerates the vertices of the parallelotope
            {u : |e_i . u| <= 1}; 'multistart' maximizes over the sphere from a
            quasi-uniform sample refined by pattern search

    Returns:
        float: theta in [0, pi/2]; exactly pi/2 for rank-deficient tuples
    """
    if method not in ("exact", "multistart"):
        raise ValueError(f"Invalid method '{method}'. Must be one of: ['exact', 'multistart']")
    if unit_vectors.dim < 2:
        raise ValueError(f"Jamet's angle needs d >= 2, got d = {unit_vectors.dim}")
    if unit_vectors.is_rank_deficient():
        return math.pi / 2
    if method == "exact":
        return float(_batch_jamet_theta(unit_vectors.vectors[np.newaxis])[0])
    return _multistart_theta(unit_vectors.vectors)


def jamet_factor(theta: float) -> float:
    """1 / cos(theta), the factor in Jamet's interpolation bounds."""
    if theta >= math.pi / 2:
        return math.inf
    return 1.0 / math.cos(theta)


def best_jamet_theta(simplex: Simplex) -> tuple[float, EdgeSelection]:
    """Smallest Jamet angle over all choices of d edges (orientation is irrelevant)."""
    d = _require_dim(simplex)
    edges, vectors = edge_unit_vectors(simplex)
    subsets = np.array(list(combinations(range(len(edges)), d)))
    thetas = _batch_jamet_theta(vectors[subsets])
    best = float(thetas.min())
    k = _first_within(thetas, best)
    return best, _selection(edges, vectors, subsets[k])


def constructed_edge_sine_bound(c: float, gamma0: float, d: int) -> float:
    """C^2 * min(sin gamma_1, sin gamma_0), the edge-parallelotope bound of the inductive construction."""
    return c * c * min(math.sin(regular_dihedral(d)), math.sin(gamma0))


def check_conditions(simplex: Simplex, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> dict[str, ConditionVerdict]:
    """
    Verdicts of the four conditions on one simplex.

    A degenerate subsimplex makes the dihedral condition fail with quantity pi
    and the offending subsimplex as witness.
    """
    return angle_report(simplex, thresholds).verdicts


def angle_report(simplex: Simplex, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> AngleReport:
    if not isinstance(thresholds, Thresholds):
        raise ThresholdError(f"expected Thresholds, got {type(thresholds).__name__}")
    _require_dim(simplex)

    min_sine = min_vertex_sine(simplex)
    edge_sine, edge_witness = best_edge_sine(simplex)
    theta, theta_witness = best_jamet_theta(simplex)
    try:
        dihedral, sub, pair = max_subsimplex_dihedral(simplex)
        dihedral_witness = DihedralWitness(sub, pair)
    except DegenerateSimplexError as e:
        logger.debug("dihedral condition on degenerate input: %s", e)
        dihedral = math.pi
        dihedral_witness = DihedralWitness(SubsimplexId(tuple(e.subsimplex or range(len(simplex)))), None)

    verdicts = {
        "min_angle": ConditionVerdict("min_angle", min_sine, thresholds.min_sine, bool(min_sine >= thresholds.min_sine)),
        "max_angle": ConditionVerdict("max_angle", edge_sine, thresholds.min_sine, bool(edge_sine >= thresholds.min_sine),
                                      edge_witness),
        "dihedral": ConditionVerdict("dihedral", dihedral, thresholds.gamma0, bool(dihedral <= thresholds.gamma0),
                                     dihedral_witness),
        "jamet": ConditionVerdict("jamet", theta, thresholds.theta0, bool(theta <= thresholds.theta0), theta_witness),
    }
    return AngleReport(
        min_vertex_sine=min_sine,
        best_edge_sine=edge_sine,
        max_dihedral=dihedral,
        jamet_theta=theta,
        verdicts=verdicts,
        degenerate=is_degenerate(simplex),
    )
