import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxangle.errors import DegenerateSimplexError
from maxangle.families import cap_simplex, path_simplex
from maxangle.geometry import Simplex
from maxangle.interpolation import (
    InterpolationError,
    TestFunction,
    affine_suite,
    barycentric_lattice,
    default_suite,
    gradient_ratio,
    interpolation_error,
    interpolation_ratio,
    lagrange_interpolant,
)
from maxangle.studies import well_conditioned_simplex


def _by_name(suite, name):
    return next(v for v in suite if v.name == name)


class TestSuites:
    def test_default_suite(self):
        assert [v.name for v in default_suite(2)] == ["x1^2", "x1*x2", "x2^2"]
        assert len(default_suite(4)) == 10
        assert all(v.hessian_sup > 0 for v in default_suite(3))

    def test_monomial_gradient(self):
        v = _by_name(default_suite(3), "x1*x3")
        x = np.array([[1.0, 2.0, 3.0]])
        assert v.evaluator(x).tolist() == [3.0]
        assert v.gradient(x).tolist() == [[3.0, 0.0, 1.0]]
        assert v.hessian_sup == 1.0

    def test_affine_suite(self):
        suite = affine_suite(3)
        assert [v.name for v in suite] == ["1", "x1", "x2", "x3"]
        assert all(v.hessian_sup == 0.0 for v in suite)

    def test_negative_hessian_bound(self):
        with pytest.raises(ValueError):
            TestFunction("bad", lambda x: x[:, 0], lambda x: x, -1.0)


class TestLattice:
    def test_size_and_weights(self):
        lattice = barycentric_lattice(3, 4)
        assert lattice.shape == (math.comb(4 + 3, 3), 4)
        assert np.allclose(lattice.sum(axis=1), 1.0)
        assert np.all(lattice >= 0.0)

    def test_contains_vertices_and_midpoints(self):
        lattice = barycentric_lattice(2, 2)
        rows = {tuple(r) for r in lattice.tolist()}
        assert rows == {(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0),
                        (0.5, 0.5, 0.0), (0.5, 0.0, 0.5), (0.0, 0.5, 0.5)}

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            barycentric_lattice(2, 0)


class TestLagrangeInterpolant:
    def test_corner_tetrahedron(self, corner_simplex):
        s = corner_simplex(3)
        v = np.array([0.0, 1.0, 1.0, 1.0])  # sum of x_k^2 at the vertices
        interpolant = lagrange_interpolant(s, v)
        assert np.allclose(interpolant.gradient, [1.0, 1.0, 1.0], atol=1e-14)
        assert interpolant.offset == pytest.approx(0.0, abs=1e-14)

    def test_matches_edge_system(self, rng):
        for d in (2, 3, 4):
            s = well_conditioned_simplex(d, rng)
            values = rng.standard_normal(d + 1)
            interpolant = lagrange_interpolant(s, values)
            expected = np.linalg.solve(s.edge_matrix().T, values[1:] - values[0])
            assert np.allclose(interpolant.gradient, expected, atol=1e-10)
            assert np.allclose(interpolant(s.vertices), values, atol=1e-10)

    def test_scalar_point(self, right_triangle):
        interpolant = lagrange_interpolant(right_triangle, [1.0, 2.0, 3.0])
        assert interpolant(np.array([0.5, 0.5])) == pytest.approx(2.5)

    def test_validation(self, right_triangle, corner_simplex):
        with pytest.raises(ValueError):
            lagrange_interpolant(right_triangle, [1.0, 2.0])
        with pytest.raises(ValueError):
            lagrange_interpolant(corner_simplex(3).sub([1, 2, 3]), [1.0, 2.0, 3.0])
        with pytest.raises(DegenerateSimplexError):
            lagrange_interpolant(Simplex([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), [1.0, 2.0, 3.0])


class TestInterpolationError:
    def test_square_on_right_triangle(self, right_triangle):
        err = interpolation_error(right_triangle, _by_name(default_suite(2), "x1^2"))
        assert err.sup_value_err == pytest.approx(0.25, abs=1e-14)
        assert err.sup_gradient_err == pytest.approx(1.0, abs=1e-12)
        assert err.norm == pytest.approx(1.0, abs=1e-12)

    def test_affine_functions_are_reproduced(self, rng):
        for d in (2, 3, 4):
            s = well_conditioned_simplex(d, rng)
            for v in affine_suite(d):
                assert interpolation_error(s, v).norm < 1e-12

    def test_lattice_order(self, right_triangle):
        with pytest.raises(ValueError):
            interpolation_error(right_triangle, default_suite(2)[0], lattice_order=1)

    def test_norm(self):
        assert InterpolationError(0.5, 0.25).norm == 0.5


class TestRatios:
    def test_right_triangle(self, right_triangle):
        # x1*x2 vanishes at every vertex; its gradient reaches 1 at (1, 0)
        assert interpolation_ratio(right_triangle, default_suite(2)) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_affine_members_contribute_nothing(self, right_triangle):
        suite = default_suite(2) + affine_suite(2)
        assert interpolation_ratio(right_triangle, suite) == interpolation_ratio(right_triangle, default_suite(2))
        assert interpolation_ratio(right_triangle, affine_suite(2)) == 0.0

    def test_empty_suite(self, right_triangle):
        with pytest.raises(ValueError):
            interpolation_ratio(right_triangle, [])

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        order=st.permutations(range(4)),
        shift=st.lists(st.floats(min_value=-5.0, max_value=5.0), min_size=3, max_size=3),
    )
    def test_translation_and_relabeling_invariance(self, seed, order, shift):
        s = well_conditioned_simplex(3, np.random.default_rng(seed))
        suite = default_suite(3)
        base = interpolation_ratio(s, suite)
        moved = Simplex(s.vertices[list(order)] + np.array(shift))
        assert interpolation_ratio(moved, suite) == pytest.approx(base, rel=1e-8)

    @pytest.mark.parametrize("offset", [1e3, 1e6, 1e8])
    def test_affine_suite_far_from_the_origin(self, right_triangle, offset):
        moved = Simplex(right_triangle.vertices + offset)
        assert interpolation_ratio(moved, affine_suite(2)) == 0.0
        assert gradient_ratio(moved, affine_suite(2)) == 0.0

    def test_mixed_suite_after_translation(self, right_triangle):
        moved = Simplex(right_triangle.vertices + np.array([10.0, -7.0]))
        suite = default_suite(2) + affine_suite(2)
        assert interpolation_ratio(moved, suite) == pytest.approx(1 / math.sqrt(2), rel=1e-9)

    @pytest.mark.parametrize("scale", [1e-3, 0.1, 10.0])
    def test_gradient_ratio_is_scale_invariant(self, rng, scale):
        s = well_conditioned_simplex(3, rng)
        suite = default_suite(3)
        scaled = Simplex(s.vertices * scale)
        assert gradient_ratio(scaled, suite) == pytest.approx(gradient_ratio(s, suite), rel=1e-8)

    @pytest.mark.parametrize("d", [2, 3])
    def test_path_simplices_stay_bounded(self, d):
        suite = default_suite(d)
        ratios = [interpolation_ratio(path_simplex(d, 2.0**-k), suite) for k in range(1, 11)]
        assert max(ratios) < 2 * ratios[0]

    def test_flat_caps_blow_up(self):
        suite = default_suite(3)
        assert interpolation_ratio(cap_simplex(3, 1e-3), suite) > 10 * interpolation_ratio(cap_simplex(3, 0.5), suite)
