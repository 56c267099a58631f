import itertools
import math

import numpy as np
import pytest

from maxangle.conditions import Thresholds
from maxangle.errors import MeshParseError, MeshValidationError
from maxangle.families import cap_simplex, family_member, path_simplex
from maxangle.geometry import measure, regular_simplex
from maxangle.interpolation import barycentric_lattice
from maxangle.meshes import (
    SimplicialMesh,
    analyze_mesh,
    face_to_face_check,
    family_mesh,
    get_available_solvers,
    kuhn_mesh,
    parse_mesh,
    serialize_mesh,
)

TRIANGLE_MESH = """\
# two triangles on the unit square
dim 2
vertices 4
0 0
1 0   # trailing comment
1 1
0 1

elements 2
0 1 2
0 2 3
"""

# a hanging node at (1, 0): element 0 has the full edge (0,0)-(2,0), the
# elements below it only halves of it
HANGING_NODE_MESH = SimplicialMesh(
    dim=2,
    vertices=[[0.0, 0.0], [2.0, 0.0], [1.0, 1.0], [1.0, 0.0], [1.0, -1.0]],
    elements=[[0, 1, 2], [0, 3, 4], [3, 1, 4]],
)


def _in_hull(points: np.ndarray, p: np.ndarray, tol: float = 1e-9) -> bool:
    # affine weights of p on the rows of `points`, all non-negative with zero residual
    if len(points) == 0:
        return False
    system = np.vstack([points.T, np.ones(len(points))])
    target = np.append(p, 1.0)
    weights = np.linalg.lstsq(system, target, rcond=None)[0]
    return bool(np.linalg.norm(system @ weights - target) < tol and weights.min() > -tol)


def _sampled_violations(mesh: SimplicialMesh, order: int = 10) -> list[tuple[int, int]]:
    """Pairs whose sampled common points leave the hull of their shared vertices."""
    lattice = barycentric_lattice(mesh.dim, order)
    violations = []
    for e, f in itertools.combinations(range(len(mesh)), 2):
        shared = mesh.vertices[sorted(set(mesh.elements[e]) & set(mesh.elements[f]))]
        for a, b in ((e, f), (f, e)):
            inside = mesh.vertices[mesh.elements[b]]
            samples = lattice @ mesh.vertices[mesh.elements[a]]
            if any(_in_hull(inside, p) and not _in_hull(shared, p) for p in samples):
                violations.append((e, f))
                break
    return violations


class TestParse:
    def test_valid(self):
        mesh = parse_mesh(TRIANGLE_MESH)
        assert mesh.dim == 2
        assert len(mesh) == 2
        assert mesh.vertices.shape == (4, 2)
        assert mesh.elements.tolist() == [[0, 1, 2], [0, 2, 3]]

    def test_serialized_mesh_parses_back(self):
        mesh = parse_mesh(TRIANGLE_MESH)
        again = parse_mesh(serialize_mesh(mesh))
        assert np.array_equal(again.vertices, mesh.vertices)
        assert np.array_equal(again.elements, mesh.elements)

    def test_serialize_sorts_element_tuples(self):
        mesh = SimplicialMesh(dim=2, vertices=[[0, 0], [1, 0], [0, 1]], elements=[[2, 0, 1]])
        assert serialize_mesh(mesh).splitlines()[-1] == "0 1 2"

    @pytest.mark.parametrize("text, line, field", [
        ("dimension 2\n", 1, 1),
        ("dim two\n", 1, 2),
        ("dim 2\nvertices 3\n0 0\n1 x\n0 1\nelements 1\n0 1 2\n", 4, 2),
        ("dim 2\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n0 1\n", 7, 3),
        ("dim 2\nvertices 3\n0 0\n1 0\n0 1\nelements 2\n0 1 2\n", 8, None),
        ("dim 2\nvertices 3\n0 0\n1 inf\n0 1\nelements 1\n0 1 2\n", 4, 2),
        ("dim 2\nvertices 3\n0 0\n1 0\n0 1\nelements 1\n0 1 2\n0 1 2\n", 8, 1),
        ("dim 2\nvertices -1\n", 2, 2),
    ])
    def test_malformed(self, text, line, field):
        with pytest.raises(MeshParseError) as info:
            parse_mesh(text)
        assert info.value.line == line
        assert info.value.field == field
        assert str(info.value).startswith(f"line {line}")

    def test_empty_file(self):
        with pytest.raises(MeshParseError) as info:
            parse_mesh("# nothing here\n")
        assert info.value.line == 1


class TestValidate:
    @pytest.mark.parametrize("elements, message", [
        ([[0, 1, 5]], "out of range"),
        ([[0, 1, 1]], "repeated vertex"),
        ([[0, 1, 2], [2, 1, 0]], "duplicate of element 0"),
        ([[0, 1, 3]], "zero measure"),
    ])
    def test_invalid_elements(self, elements, message):
        text = "dim 2\nvertices 4\n0 0\n1 0\n0 1\n2 0\n"
        text += f"elements {len(elements)}\n" + "".join(" ".join(map(str, e)) + "\n" for e in elements)
        with pytest.raises(MeshValidationError, match=message):
            parse_mesh(text)

    def test_names_the_element(self):
        mesh = SimplicialMesh(dim=2, vertices=[[0, 0], [1, 0], [0, 1], [2, 0]], elements=[[0, 1, 2], [0, 1, 3]])
        with pytest.raises(MeshValidationError) as info:
            mesh.validate()
        assert info.value.element == 1
        assert str(info.value).startswith("element 1:")

    def test_coincident_vertices(self):
        mesh = SimplicialMesh(dim=2, vertices=[[0, 0], [0, 0], [1, 1]], elements=[[0, 1, 2]])
        with pytest.raises(MeshValidationError):
            mesh.validate()

    def test_dimension_and_emptiness(self):
        with pytest.raises(MeshValidationError):
            SimplicialMesh(dim=1, vertices=[[0], [1]], elements=[[0, 1]]).validate()
        with pytest.raises(MeshValidationError):
            SimplicialMesh(dim=2, vertices=[[0, 0]], elements=np.zeros((0, 3))).validate()


class TestGenerators:
    @pytest.mark.parametrize("d, divisions", [(2, 1), (2, 3), (3, 2), (4, 1)])
    def test_kuhn_mesh_fills_the_cube(self, d, divisions):
        mesh = kuhn_mesh(d, divisions).validate()
        assert len(mesh) == math.factorial(d) * divisions**d
        assert len(mesh.vertices) == (divisions + 1) ** d
        total = sum(measure(mesh.simplex(e)) for e in range(len(mesh)))
        assert total == pytest.approx(1.0, rel=1e-12)

    def test_kuhn_elements_are_path_simplices(self):
        mesh = kuhn_mesh(3, 1)
        target = path_simplex(3, 1.0)
        for e in range(len(mesh)):
            assert measure(mesh.simplex(e)) == pytest.approx(measure(target))

    def test_kuhn_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            kuhn_mesh(1)
        with pytest.raises(ValueError):
            kuhn_mesh(2, 0)

    def test_family_mesh_lays_members_apart(self):
        members = [family_member("cap", 3, eps) for eps in (0.5, 0.1, 0.01)]
        mesh = family_mesh(members).validate()
        assert len(mesh) == 3
        boxes = [mesh.simplex(e).vertices[:, 0] for e in range(3)]
        for left, right in zip(boxes, boxes[1:]):
            assert right.min() - left.max() == pytest.approx(1.0)

    def test_family_mesh_needs_matching_members(self):
        with pytest.raises(ValueError):
            family_mesh([])
        with pytest.raises(ValueError):
            family_mesh([regular_simplex(2), regular_simplex(3)])


class TestFaceToFace:
    def test_solvers_are_listed(self):
        assert isinstance(get_available_solvers(), list)

    def test_two_triangles(self):
        result = face_to_face_check(parse_mesh(TRIANGLE_MESH))
        assert result.conforming
        assert bool(result)
        assert result.violations == []

    @pytest.mark.parametrize("d, divisions", [(2, 2), (3, 1), (4, 1), pytest.param(3, 2, marks=pytest.mark.slow)])
    def test_kuhn_meshes_conform(self, d, divisions):
        result = face_to_face_check(kuhn_mesh(d, divisions))
        assert result.conforming, result.violations

    def test_hanging_node(self):
        result = face_to_face_check(HANGING_NODE_MESH.validate())
        assert not result.conforming
        assert result.violations == [(0, 1), (0, 2)]

    def test_overlapping_elements(self):
        mesh = SimplicialMesh(dim=2, vertices=[[0, 0], [1, 0], [0, 1], [0.2, 0.2], [2, 0.2], [0.2, 2]],
                              elements=[[0, 1, 2], [3, 4, 5]])
        assert face_to_face_check(mesh.validate()).violations == [(0, 1)]

    def test_folded_facet(self):
        # both triangles lie on the same side of their common edge
        mesh = SimplicialMesh(dim=2, vertices=[[0, 0], [1, 0], [0, 1], [0.3, 0.3]],
                              elements=[[0, 1, 2], [0, 1, 3]])
        assert not face_to_face_check(mesh.validate()).conforming

    def test_overfull_facet(self):
        mesh = SimplicialMesh(dim=2, vertices=[[0, 0], [1, 0], [0, 1], [0, -1], [0.5, 2]],
                              elements=[[0, 1, 2], [0, 1, 3], [0, 1, 4]])
        result = face_to_face_check(mesh.validate())
        assert result.overfull_facets == [(0, 1)]
        assert (0, 1) in result.violations and (0, 2) in result.violations and (1, 2) in result.violations

    def test_separated_members(self):
        members = [family_member("needle", 2, eps) for eps in (0.5, 0.1)]
        assert face_to_face_check(family_mesh(members)).conforming

    @pytest.mark.parametrize("mesh", [
        parse_mesh(TRIANGLE_MESH),
        HANGING_NODE_MESH,
        SimplicialMesh(dim=2, vertices=[[0, 0], [1, 0], [0, 1], [0.2, 0.2], [2, 0.2], [0.2, 2]],
                       elements=[[0, 1, 2], [3, 4, 5]]),
        SimplicialMesh(dim=2, vertices=[[0, 0], [1, 0], [0, 1], [0.3, 0.3]], elements=[[0, 1, 2], [0, 1, 3]]),
        kuhn_mesh(2, 2),
        kuhn_mesh(3, 1),
        family_mesh([family_member("needle", 2, eps) for eps in (0.5, 0.1)]),
    ], ids=["square", "hanging-node", "overlap", "folded", "kuhn-2", "kuhn-3", "needles"])
    def test_matches_pairwise_sampling(self, mesh):
        assert face_to_face_check(mesh.validate()).violations == _sampled_violations(mesh)


class TestAnalyze:
    def test_cap_element_is_flagged(self):
        mesh = family_mesh([regular_simplex(3), cap_simplex(3, 1e-4)])
        analysis = analyze_mesh(mesh)
        assert not analysis.satisfied
        assert analysis.summary["elements"] == 2
        assert analysis.summary["errors"] == 0
        assert analysis.summary["violating_elements"] == [1]
        assert analysis.summary["max_dihedral"] > 3.0
        assert analysis.elements[0].satisfied
        assert not analysis.elements[1].report.verdicts["dihedral"].satisfied

    def test_kuhn_mesh_satisfies_everything(self):
        analysis = analyze_mesh(kuhn_mesh(3, 1), Thresholds(gamma0=2.0, min_sine=0.1, theta0=1.2))
        assert analysis.satisfied
        assert analysis.summary["max_dihedral"] == pytest.approx(math.pi / 2, abs=1e-9)
        assert analysis.summary["min_best_edge_sine"] == pytest.approx(1.0, abs=1e-12)

    def test_threads_give_the_same_reports(self):
        mesh = kuhn_mesh(2, 3)
        sequential = analyze_mesh(mesh)
        threaded = analyze_mesh(mesh, max_workers=4)
        assert [r.as_dict() for r in threaded.elements] == [r.as_dict() for r in sequential.elements]

    def test_element_errors_do_not_stop_the_run(self):
        mesh = SimplicialMesh(dim=2, vertices=[[0, 0], [0, 0], [1, 1], [1, 0]], elements=[[0, 1, 2], [0, 2, 3]])
        analysis = analyze_mesh(mesh)
        assert analysis.elements[0].error is not None
        assert "error" in analysis.elements[0].as_dict()
        assert analysis.elements[1].report is not None
        assert analysis.summary["errors"] == 1
        assert not analysis.satisfied
