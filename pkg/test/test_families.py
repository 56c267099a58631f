import math

import numpy as np
import pytest

from maxangle.conditions import best_edge_sine, max_subsimplex_dihedral, min_vertex_sine
from maxangle.errors import FamilyError
from maxangle.families import (
    FAMILY_NAMES,
    FamilySpec,
    family_member,
    generate_family,
    geometric_schedule,
    needle_simplex,
    path_simplex,
    sliver_simplex,
    splinter_simplex,
)
from maxangle.geometry import diameter, is_degenerate, regular_simplex


class TestSchedule:
    def test_geometric(self):
        assert geometric_schedule(0.5, 0.5, 4) == (0.5, 0.25, 0.125, 0.0625)

    @pytest.mark.parametrize("start, factor, count", [(0.5, 0.5, 0), (0.5, 1.0, 3), (0.5, 0.0, 3), (-1.0, 0.5, 3)])
    def test_invalid(self, start, factor, count):
        with pytest.raises(FamilyError):
            geometric_schedule(start, factor, count)


class TestFamilySpec:
    def test_unknown_family(self):
        with pytest.raises(FamilyError, match="Unknown family 'blob'"):
            FamilySpec("blob", 3, (0.5,))

    def test_sliver_only_in_three_dimensions(self):
        with pytest.raises(FamilyError):
            FamilySpec("sliver", 4, (0.5,))
        FamilySpec("sliver", 3, (0.5,))

    @pytest.mark.parametrize("schedule", [(), (0.5, 0.5), (0.25, 0.5), (0.5, 0.0), (math.inf,)])
    def test_rejects_bad_schedules(self, schedule):
        with pytest.raises(FamilyError):
            FamilySpec("path", 3, schedule)

    def test_rejects_dimension_one(self):
        with pytest.raises(FamilyError):
            FamilySpec("regular", 1, (0.5,))

    def test_schedule_becomes_floats(self):
        assert FamilySpec("path", 2, [1, 0.5]).schedule == (1.0, 0.5)


class TestMembers:
    @pytest.mark.parametrize("name", FAMILY_NAMES)
    def test_every_family_builds_d_simplices(self, name):
        d = 3
        for eps in (0.5, 1e-3):
            s = family_member(name, d, eps, np.random.default_rng(0))
            assert s.dim == d
            assert s.ambient_dim == d

    def test_path_edges(self):
        s = path_simplex(3, 0.1)
        chain = np.diff(s.vertices, axis=0)
        assert np.allclose(chain, np.diag([1.0, 0.1, 0.01]))

    def test_needle_keeps_vertex_at_eps(self):
        s = needle_simplex(3, 1e-3)
        assert np.linalg.norm(s.vertices[3] - s.vertices[0]) == pytest.approx(1e-3, rel=1e-12)
        assert diameter(s) == pytest.approx(1.0, rel=1e-12)

    def test_sliver_geometry(self):
        s = sliver_simplex(0.2)
        assert s.vertices[0, 2] - s.vertices[2, 2] == pytest.approx(0.2)

    def test_splinter_shrinks_all_but_one_axis(self):
        s = splinter_simplex(3, 1e-2)
        assert np.allclose(s.vertices[:, 1:], regular_simplex(3).vertices[:, 1:] * 1e-2)

    def test_regular_ignores_eps(self):
        a = family_member("regular", 4, 0.5)
        b = family_member("regular", 4, 1e-6)
        assert np.array_equal(a.vertices, b.vertices)

    def test_sliver_needs_three_dimensions(self):
        with pytest.raises(FamilyError):
            family_member("sliver", 2, 0.5)

    def test_unknown_name(self):
        with pytest.raises(FamilyError):
            family_member("blob", 2, 0.5)


class TestGenerateFamily:
    def test_deterministic(self):
        spec = FamilySpec("random", 3, geometric_schedule(0.5, 0.5, 5), seed=7)
        first, second = generate_family(spec), generate_family(spec)
        assert all(np.array_equal(a.vertices, b.vertices) for a, b in zip(first, second))

    def test_random_members_differ_and_are_nondegenerate(self):
        members = generate_family(FamilySpec("random", 3, (0.5, 0.25, 0.125), seed=1))
        assert not np.array_equal(members[0].vertices, members[1].vertices)
        assert not any(is_degenerate(s) for s in members)

    def test_schedule_order(self):
        spec = FamilySpec("cap", 3, (0.5, 0.1, 0.01))
        heights = [s.vertices[-1, -1] for s in generate_family(spec)]
        assert heights == [0.5, 0.1, 0.01]


class TestDegenerationBehaviour:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_needle_keeps_the_max_angle_conditions(self, d):
        s = needle_simplex(d, 1e-4)
        assert min_vertex_sine(s) < 1e-3
        assert best_edge_sine(s)[0] > 0.5
        assert max_subsimplex_dihedral(s)[0] < 2 * math.pi / 3 + 1e-6

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_splinter_flattens(self, d):
        s = splinter_simplex(d, 1e-6)
        assert best_edge_sine(s)[0] < 1e-3
        assert max_subsimplex_dihedral(s)[0] > math.pi - 1e-2

    def test_sliver_flattens(self):
        s = sliver_simplex(1e-5)
        assert best_edge_sine(s)[0] < 1e-3
        assert max_subsimplex_dihedral(s)[0] > math.pi - 1e-3
