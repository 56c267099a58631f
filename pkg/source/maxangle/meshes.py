"""
Face-to-face simplicial meshes: text format, generators, conformity and
per-element quality analysis.

Mesh file format (UTF-8, line oriented, `#` starts a comment anywhere):

    dim <d>
    vertices <n>
    <d coordinates>          n lines
    elements <m>
    <d+1 vertex indices>     m lines, zero based
"""

import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import List, Optional

import numpy as np
import pulp

from maxangle.conditions import DEFAULT_THRESHOLDS, AngleReport, Thresholds, angle_report
from maxangle.errors import MeshParseError, MeshValidationError
from maxangle.geometry import Simplex, barycentric_gradients, is_degenerate

logger = logging.getLogger(__name__)

# barycentric coordinates within this of 0 put a point on a facet hyperplane
PLANE_TOL = 1e-10
# LP weight on non-shared vertices above this means the elements overlap
OVERLAP_TOL = 1e-7
# gap between consecutive members in family_mesh
FAMILY_GAP = 1.0


@dataclass(eq=False)
class SimplicialMesh:
    """
    Simplicial mesh of dimension d.

    Attributes:
        dim (int): Spatial and element dimension d
        vertices (np.ndarray): n x d vertex coordinates
        elements (np.ndarray): m x (d+1) zero-based vertex indices
    """

    dim: int
    vertices: np.ndarray
    elements: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, self.dim)
        self.elements = np.asarray(self.elements, dtype=np.int64).reshape(-1, self.dim + 1)

    def __len__(self) -> int:
        return len(self.elements)

    def simplex(self, e: int) -> Simplex:
        return Simplex(self.vertices[self.elements[e]])

    def validate(self) -> "SimplicialMesh":
        """
        Checks index ranges, element measures and duplicates.

        Raises:
            MeshValidationError: Naming the first offending element
        """
        if self.dim < 2:
            raise MeshValidationError(f"mesh dimension must be >= 2, got {self.dim}")
        if len(self.elements) == 0:
            raise MeshValidationError("mesh has no elements")
        n = len(self.vertices)
        seen = {}
        for e, element in enumerate(self.elements):
            bad = [int(i) for i in element if not 0 <= i < n]
            if bad:
                raise MeshValidationError(f"vertex index {bad[0]} out of range 0..{n - 1}", element=e)
            key = tuple(sorted(int(i) for i in element))
            if len(set(key)) != len(key):
                raise MeshValidationError(f"repeated vertex index in {key}", element=e)
            if key in seen:
                raise MeshValidationError(f"duplicate of element {seen[key]}", element=e)
            seen[key] = e
            try:
                degenerate = is_degenerate(self.simplex(e))
            except ValueError as err:
                raise MeshValidationError(str(err), element=e) from err
            if degenerate:
                raise MeshValidationError("element has zero measure", element=e)
        return self


def _tokens(text: str):
    """Yields (line number, fields) of the non-empty lines with comments removed."""
    for number, line in enumerate(text.splitlines(), start=1):
        fields = line.split("#", 1)[0].split()
        if fields:
            yield number, fields


def _header(lines, keyword: str, last_line: int) -> tuple[int, int]:
    try:
        number, fields = next(lines)
    except StopIteration:
        raise MeshParseError(f"expected '{keyword} <count>', got end of file", line=last_line + 1) from None
    if len(fields) != 2 or fields[0] != keyword:
        raise MeshParseError(f"expected '{keyword} <count>'", line=number, field=1)
    try:
        value = int(fields[1])
    except ValueError:
        raise MeshParseError(f"'{fields[1]}' is not an integer", line=number, field=2) from None
    if value < 0:
        raise MeshParseError(f"{keyword} must be non-negative, got {value}", line=number, field=2)
    return number, value


def _rows(lines, count: int, width: int, convert, what: str, last_line: int) -> tuple[list, int]:
    rows = []
    for _ in range(count):
        try:
            number, fields = next(lines)
        except StopIteration:
            raise MeshParseError(f"expected {count} {what} lines, got {len(rows)}", line=last_line + 1) from None
        if len(fields) != width:
            raise MeshParseError(f"expected {width} {what} fields, got {len(fields)}", line=number,
                                 field=min(len(fields), width) + 1)
        row = []
        for k, token in enumerate(fields, start=1):
            try:
                value = convert(token)
            except ValueError:
                raise MeshParseError(f"'{token}' is not a valid {what} value", line=number, field=k) from None
            if isinstance(value, float) and not math.isfinite(value):
                raise MeshParseError(f"coordinate '{token}' is not finite", line=number, field=k)
            row.append(value)
        rows.append(row)
        last_line = number
    return rows, last_line


def parse_mesh(text: str) -> SimplicialMesh:
    """
    Parses and validates a mesh in the text format of this module.

    Raises:
        MeshParseError: On malformed content, with line and field position
        MeshValidationError: On out-of-range indices, zero-measure or duplicate elements
    """
    lines = _tokens(text)
    line, d = _header(lines, "dim", 0)
    if d < 1:
        raise MeshParseError(f"dim must be positive, got {d}", line=line, field=2)
    line, n = _header(lines, "vertices", line)
    vertices, line = _rows(lines, n, d, float, "coordinate", line)
    line, m = _header(lines, "elements", line)
    elements, line = _rows(lines, m, d + 1, int, "vertex index", line)
    for number, _ in lines:
        raise MeshParseError("unexpected content after the last element", line=number, field=1)

    return SimplicialMesh(
        dim=d,
        vertices=np.array(vertices, dtype=np.float64).reshape(n, d),
        elements=np.array(elements, dtype=np.int64).reshape(m, d + 1),
    ).validate()


def serialize_mesh(mesh: SimplicialMesh) -> str:
    """Canonical text form: element tuples sorted, coordinates at 17 significant digits."""
    out = [f"dim {mesh.dim}", f"vertices {len(mesh.vertices)}"]
    out += [" ".join(format(float(x), ".17g") for x in row) for row in mesh.vertices]
    out.append(f"elements {len(mesh.elements)}")
    out += [" ".join(str(int(i)) for i in sorted(element)) for element in mesh.elements]
    return "\n".join(out) + "\n"


def kuhn_mesh(d: int, divisions: int = 1) -> SimplicialMesh:
    """
    Kuhn subdivision of the unit d-cube: each of the divisions^d sub-cubes is cut
    into the d! path simplices x_{p(1)} >= ... >= x_{p(d)} along its main diagonal.
    """
    if d < 2:
        raise ValueError(f"Kuhn meshes need d >= 2, got {d}")
    if divisions < 1:
        raise ValueError(f"divisions must be >= 1, got {divisions}")
    shape = (divisions + 1,) * d
    grid = np.array(list(np.ndindex(*shape)), dtype=np.float64) / divisions
    elements = []
    for cell in np.ndindex(*(divisions,) * d):
        for perm in permutations(range(d)):
            corner = np.array(cell)
            simplex = [int(np.ravel_multi_index(corner, shape))]
            for axis in perm:
                corner = corner.copy()
                corner[axis] += 1
                simplex.append(int(np.ravel_multi_index(corner, shape)))
            elements.append(simplex)
    return SimplicialMesh(dim=d, vertices=grid, elements=np.array(elements))


def family_mesh(simplices: List[Simplex]) -> SimplicialMesh:
    """Family members laid side by side along e_1, FAMILY_GAP apart, one element each."""
    if not simplices:
        raise ValueError("family_mesh needs at least one simplex")
    d = simplices[0].dim
    vertices, elements, offset = [], [], 0.0
    for k, s in enumerate(simplices):
        if s.dim != d or s.ambient_dim != d:
            raise ValueError(f"member {k} is not a {d}-simplex in R^{d}")
        v = s.vertices.copy()
        v[:, 0] += offset - v[:, 0].min()
        offset = v[:, 0].max() + FAMILY_GAP
        elements.append(list(range(len(vertices), len(vertices) + d + 1)))
        vertices.extend(v)
    return SimplicialMesh(dim=d, vertices=np.array(vertices), elements=np.array(elements))


@dataclass
class FaceToFaceResult:
    """
    Attributes:
        conforming (bool): True iff no violation was found
        violations (list): Offending element pairs (e, f), e < f, sorted
        overfull_facets (list): Facets (sorted vertex tuples) in more than two elements
    """

    conforming: bool
    violations: list[tuple[int, int]] = field(default_factory=list)
    overfull_facets: list[tuple[int, ...]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.conforming


def get_available_solvers() -> List[str]:
    """
    Returns a list of available LP solvers on the system.

    Returns:
        List[str]: List of available solver names
    """
    available = []
    for solver_name in ["PULP_CBC_CMD", "GLPK_CMD", "CPLEX_CMD", "GUROBI_CMD", "SCIP_CMD", "HiGHS_CMD"]:
        try:
            if pulp.getSolver(solver_name).available():
                available.append(solver_name)
        except Exception:
            pass
    return available


def _make_solver(solver_name: str):
    if solver_name == "PULP_CBC_CMD":
        return pulp.PULP_CBC_CMD(msg=False)
    if solver_name == "GLPK_CMD":
        return pulp.GLPK_CMD(msg=False)
    return pulp.getSolver(solver_name, msg=False)


def _barycentric(simplex: Simplex, gradients: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates (rows) of the points with respect to the simplex."""
    lam = (points - simplex.vertices[0]) @ gradients.T
    lam[:, 0] += 1.0
    return lam


def _separated(a: Simplex, ga: np.ndarray, b_points: np.ndarray, b_shared: np.ndarray) -> bool:
    """
    True if some facet hyperplane of `a` has all of `b` on its far side with
    only shared vertices on the hyperplane itself: the elements then meet
    exactly in the face spanned by their shared vertices.
    """
    lam = _barycentric(a, ga, b_points)
    for i in range(a.dim + 1):
        column = lam[:, i]
        if np.all(column <= PLANE_TOL) and np.all(b_shared[np.abs(column) <= PLANE_TOL]):
            return True
    return False


def _overlap_weight(a: np.ndarray, b: np.ndarray, a_shared, b_shared, solver) -> float:
    """
    max of the barycentric weight on non-shared vertices over the points common
    to both elements; 0 when they meet in their shared face, -1 when disjoint.
    """
    origin = np.vstack([a, b]).min(axis=0)
    scale = float(np.ptp(np.vstack([a, b]), axis=0).max())
    a = (a - origin) / scale
    b = (b - origin) / scale

    model = pulp.LpProblem("element_overlap", pulp.LpMaximize)
    lam = [pulp.LpVariable(f"lam_{i}", lowBound=0) for i in range(len(a))]
    mu = [pulp.LpVariable(f"mu_{j}", lowBound=0) for j in range(len(b))]
    model += pulp.lpSum([lam[i] for i in range(len(a)) if not a_shared[i]]
                        + [mu[j] for j in range(len(b)) if not b_shared[j]])
    model += pulp.lpSum(lam) == 1, "Convex_A"
    model += pulp.lpSum(mu) == 1, "Convex_B"
    for k in range(a.shape[1]):
        model += (pulp.lpSum(float(a[i, k]) * lam[i] for i in range(len(a)))
                  - pulp.lpSum(float(b[j, k]) * mu[j] for j in range(len(b)))) == 0, f"Coordinate_{k}"
    model.solve(solver)

    if model.status == pulp.LpStatusInfeasible:
        return -1.0
    if model.status != pulp.LpStatusOptimal:
        logger.warning("overlap LP ended with status %s", pulp.LpStatus[model.status])
        return math.inf
    return float(pulp.value(model.objective) or 0.0)


def _pair_conforms(mesh: SimplicialMesh, e: int, f: int, solver, cache: dict) -> bool:
    ea, eb = mesh.elements[e], mesh.elements[f]
    shared = set(ea.tolist()) & set(eb.tolist())
    a_shared = np.array([i in shared for i in ea])
    b_shared = np.array([j in shared for j in eb])
    a, b = mesh.simplex(e), mesh.simplex(f)
    for k, s in ((e, a), (f, b)):
        if k not in cache:
            cache[k] = barycentric_gradients(s)
    ga, gb = cache[e], cache[f]

    if len(shared) == mesh.dim:
        # common facet: conforming iff the opposite vertices lie on opposite sides
        i = int(np.flatnonzero(~a_shared)[0])
        j = int(np.flatnonzero(~b_shared)[0])
        return bool(_barycentric(a, ga, b.vertices[j][np.newaxis])[0, i] < -PLANE_TOL)
    if _separated(a, ga, b.vertices, b_shared) or _separated(b, gb, a.vertices, a_shared):
        return True
    return _overlap_weight(a.vertices, b.vertices, a_shared, b_shared, solver) <= OVERLAP_TOL


def _candidate_pairs(mesh: SimplicialMesh) -> list[tuple[int, int]]:
    points = mesh.vertices[mesh.elements]
    lo, hi = points.min(axis=1), points.max(axis=1)
    pad = PLANE_TOL * float(np.ptp(mesh.vertices, axis=0).max())
    pairs = []
    for e in range(len(mesh) - 1):
        overlap = np.all((lo[e + 1:] <= hi[e] + pad) & (hi[e + 1:] >= lo[e] - pad), axis=1)
        pairs.extend((e, e + 1 + int(k)) for k in np.flatnonzero(overlap))
    return pairs


def face_to_face_check(mesh: SimplicialMesh, solver_name: str = "PULP_CBC_CMD") -> FaceToFaceResult:
    """
    Checks that any two elements meet in a common face (possibly empty).

    Stage one counts every (d-1)-facet; more than two elements on a facet is a
    violation for each pair of them. Stage two tests each pair of elements with
    overlapping bounding boxes: a common facet is decided by the sides of the
    opposite vertices, a facet hyperplane separating the pair settles it
    exactly, and otherwise an LP maximizes the barycentric weight of the
    non-shared vertices over the intersection of the two elements.

    Args:
        mesh (SimplicialMesh): A validated mesh
        solver_name (str): pulp solver for the LP fallback ('PULP_CBC_CMD', 'GLPK_CMD', ...)

    Returns:
        FaceToFaceResult: Verdict and the offending element pairs
    """
    violations = set()
    incidence = defaultdict(list)
    for e, element in enumerate(mesh.elements):
        for f in combinations(sorted(int(i) for i in element), mesh.dim):
            incidence[f].append(e)
    overfull = sorted(f for f, owners in incidence.items() if len(owners) > 2)
    for f in overfull:
        violations.update(combinations(incidence[f], 2))

    solver = _make_solver(solver_name)
    cache = {}
    for e, f in _candidate_pairs(mesh):
        if (e, f) in violations:
            continue
        if not _pair_conforms(mesh, e, f, solver, cache):
            violations.add((e, f))

    result = FaceToFaceResult(conforming=not violations, violations=sorted(violations), overfull_facets=overfull)
    if violations:
        logger.info("mesh is not face-to-face: %d offending pairs", len(violations))
    return result


@dataclass
class ElementReport:
    element: int
    vertex_indices: tuple[int, ...]
    report: Optional[AngleReport] = None
    error: Optional[str] = None

    @property
    def satisfied(self) -> bool:
        return self.error is None and self.report.satisfied

    def as_dict(self) -> dict:
        result = {"element": self.element, "vertices": list(self.vertex_indices)}
        if self.error is not None:
            result["error"] = self.error
        else:
            result.update(self.report.as_dict())
            result["satisfied"] = self.report.satisfied
        return result


@dataclass
class MeshAnalysis:
    elements: list[ElementReport]
    summary: dict

    @property
    def satisfied(self) -> bool:
        return all(r.satisfied for r in self.elements)


def _analyze_element(mesh: SimplicialMesh, e: int, thresholds: Thresholds) -> ElementReport:
    indices = tuple(int(i) for i in mesh.elements[e])
    try:
        return ElementReport(e, indices, report=angle_report(mesh.simplex(e), thresholds))
    except Exception as err:
        logger.warning("element %d: %s", e, err)
        return ElementReport(e, indices, error=str(err))


def _summary(reports: list[ElementReport]) -> dict:
    ok = [r.report for r in reports if r.error is None]

    def extreme(fn, key):
        return fn(getattr(r, key) for r in ok) if ok else None

    return {
        "elements": len(reports),
        "errors": sum(r.error is not None for r in reports),
        "violating_elements": [r.element for r in reports if r.error is None and not r.satisfied],
        "min_best_edge_sine": extreme(min, "best_edge_sine"),
        "max_dihedral": extreme(max, "max_dihedral"),
        "max_jamet_theta": extreme(max, "jamet_theta"),
        "min_vertex_sine": extreme(min, "min_vertex_sine"),
    }


def analyze_mesh(mesh: SimplicialMesh, thresholds: Thresholds = DEFAULT_THRESHOLDS,
                 max_workers: int = 1) -> MeshAnalysis:
    """
    Applies every angle condition to every element.

    A failing element is reported with its error and does not stop the run.

    Args:
        mesh (SimplicialMesh): A validated mesh
        thresholds (Thresholds): Condition thresholds
        max_workers (int): Worker threads; 1 runs sequentially

    Returns:
        MeshAnalysis: Per-element reports in element order and the summary
    """
    indices = range(len(mesh))
    if max_workers <= 1:
        reports = [_analyze_element(mesh, e, thresholds) for e in indices]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            reports = list(executor.map(lambda e: _analyze_element(mesh, e, thresholds), indices))
    return MeshAnalysis(elements=reports, summary=_summary(reports))
