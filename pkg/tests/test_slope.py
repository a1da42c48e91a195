import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slopelab.api.catalog.helper import load_catalog
from slopelab.api.metric_space.helper import sublevel_restrict
from slopelab.api.slope.helper import (
    local_slope_finite,
    discrete_slope,
    lip_estimate,
    lip_distance_profile,
    check_slope_lip_at_min,
    smooth_slope_error,
    analytic_slopes,
)
from slopelab.exceptions import InputError, PreconditionError
from slopelab.functions import ScaledNorm, Quadratic, linear
from slopelab.models import EuclideanGrid, EuclideanPoints, ScalarField, PLUS_INF


class TestSlopes:

    def test_exact_slope_on_finite_space_is_zero(self, triangle):
        space, f = triangle
        assert all(local_slope_finite(space, f, i).value == 0 for i in range(space.size))

    def test_discrete_slope_at_diameter_scale(self, path3):
        space, f = path3
        estimate = discrete_slope(space, f, 2, space.diameter())
        assert estimate.value == pytest.approx(1.0)
        assert estimate.witness == '1'

    def test_constant_field_has_zero_slope(self, path3):
        space, _ = path3
        f = ScalarField(space, [5.0, 5.0, 5.0])
        assert all(discrete_slope(space, f, i, 2.0).value == 0 for i in range(3))

    def test_square_on_a_coarse_grid(self, line_grid):
        f = ScalarField.sample(line_grid, Quadratic(1, 2.0))
        x = line_grid.locate([1.0])
        estimate = discrete_slope(line_grid, f, x, 0.5)
        assert estimate.value == pytest.approx(1.75)
        assert estimate.witness == '0.75'

    def test_minimum_of_abs_has_zero_slope(self, line_grid):
        f = ScalarField.sample(line_grid, ScaledNorm(1))
        assert discrete_slope(line_grid, f, line_grid.center_index, 0.5).value == 0

    def test_half_square_norm_tracks_the_gradient(self):
        grid = EuclideanGrid(2, [0.0, 0.0], 1.0, 0.05)
        function = Quadratic(2, 1.0)
        x = grid.locate([0.5, 0.3])
        error, bound = smooth_slope_error(grid, function, x, 0.2)
        assert error <= bound

    def test_slope_radius_must_be_positive(self, path3):
        space, f = path3
        with pytest.raises(InputError):
            discrete_slope(space, f, 0, 0)

    def test_capped_slope_is_reported_infinite(self, path3):
        space, _ = path3
        f = ScalarField(space, [0.0, 1e15, 0.0])
        estimate = discrete_slope(space, f, 1, 1.0)
        assert estimate.value is PLUS_INF
        assert estimate.capped

    @given(st.floats(min_value=0, max_value=10), st.integers(min_value=0, max_value=40))
    @settings(max_examples=40, deadline=None)
    def test_positive_homogeneity(self, r, i):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.05)
        f = ScalarField.sample(grid, Quadratic(1, 2.0, [0.3]))
        plain = discrete_slope(grid, f, i, 0.2).value
        scaled = discrete_slope(grid, f.scaled(r), i, 0.2).value
        assert scaled == pytest.approx(r * plain, rel=1e-9, abs=1e-12)

    @given(st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=3, max_size=10, unique=True),
           st.data())
    @settings(max_examples=100, deadline=None)
    def test_slope_is_unchanged_on_the_sublevel_set(self, coords, data):
        space = EuclideanPoints(np.array(coords, dtype=float)).as_finite_space()
        values = data.draw(st.lists(st.integers(-5, 5), min_size=space.size, max_size=space.size))
        f = ScalarField(space, np.array(values, dtype=float))
        x0 = data.draw(st.integers(min_value=0, max_value=space.size - 1))
        eps = data.draw(st.floats(min_value=0.5, max_value=60))

        subspace, restricted, indices = sublevel_restrict(space, f, x0)
        for k, i in enumerate(indices):
            inside = discrete_slope(subspace, restricted, k, eps)
            outside = discrete_slope(space, f, i, eps)
            assert inside.value == outside.value
            assert inside.witness == outside.witness

    def test_slope_characterization_over_the_catalog(self):
        """discrete slope against min-norm subgradient norm across every catalog entry."""
        h, eps = 1e-2, 4e-2
        total, close, within_ten = 0, 0, 0
        for function in load_catalog().values():
            grid = EuclideanGrid(function.dim, np.zeros(function.dim), 0.5, h if function.dim == 1 else 0.05)
            sampled = ScalarField.sample(grid, function)
            analytic = analytic_slopes(grid, function)
            rng = np.random.default_rng(0)
            for x in rng.choice(grid.size, size=min(25, grid.size), replace=False):
                step = grid.spacing
                radius = eps if function.dim == 1 else 4 * step
                value = discrete_slope(grid, sampled, x, radius).value
                bound = 5 * (radius + step) * (1 + function.curvature_on(grid.coords[x], radius)
                                                  + function.lipschitz_on(grid.coords[x], radius))
                gap = abs(value - analytic.values[x])
                total += 1
                close += gap <= bound
                within_ten += gap <= 10 * bound
        assert close >= 0.99 * total
        assert within_ten == total


class TestLipschitz:

    def test_square_distance_profile(self):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.05)
        report = lip_distance_profile(grid, grid.center_index, lambda t: t ** 2, lambda t: 2 * t, [0.25, 0.5, 1.0])
        assert report['holds']
        assert report['rows'][-1]['lip'] <= 2.0

    def test_linear_field(self):
        grid = EuclideanGrid(2, [0.0, 0.0], 1.0, 0.1)
        g = ScalarField.sample(grid, linear([3.0, 0.0]))
        estimate = lip_estimate(grid, g, np.arange(grid.size))
        assert estimate.value == pytest.approx(3.0, abs=0.1)

    def test_constant_field(self, triangle):
        space, _ = triangle
        g = ScalarField(space, [2.0, 2.0, 2.0])
        assert lip_estimate(space, g, np.arange(3)).value == 0

    def test_single_point_ball_is_degenerate(self, triangle):
        space, f = triangle
        estimate = lip_estimate(space, f, np.array([0]))
        assert estimate.degenerate


class TestSlopeAtMinimum:

    def test_abs_with_linear_perturbation(self):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.05)
        f = ScalarField.sample(grid, ScaledNorm(1))
        g = ScalarField.sample(grid, linear([-0.5]))
        report = check_slope_lip_at_min(grid, f, g, grid.center_index)
        assert report['holds']
        assert report['slope'].value == 0
        assert report['lip'].value == pytest.approx(0.5)

    def test_square_with_zero(self):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.05)
        f = ScalarField.sample(grid, Quadratic(1, 2.0))
        g = ScalarField(grid, np.zeros(grid.size))
        report = check_slope_lip_at_min(grid, f, g, grid.center_index)
        assert report['holds']

    def test_kink_plus_square_against_linear(self):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.05)
        f = ScalarField(grid, 2 * np.abs(grid.coords[:, 0]) + grid.coords[:, 0] ** 2)
        g = ScalarField(grid, -2 * grid.coords[:, 0])
        report = check_slope_lip_at_min(grid, f, g, grid.center_index)
        assert report['holds']

    def test_non_minimum_is_a_precondition_failure(self, path3):
        space, f = path3
        g = ScalarField(space, [0.0, 0.0, 0.0])
        with pytest.raises(PreconditionError):
            check_slope_lip_at_min(space, f, g, 2, eps=2.0)
