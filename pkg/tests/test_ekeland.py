import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from slopelab.api.ekeland.helper import EkelandResult, ekeland_point, verify_ekeland, slope_perturbed_min
from slopelab.exceptions import InputError, ImproperFunctionError
from slopelab.functions import Quadratic, linear
from slopelab.models import EuclideanPoints, EuclideanGrid, FiniteMetricSpace, ScalarField


@st.composite
def finite_problems(draw):
    """A random planar point set (a finite metric space), a field on it and a start."""
    n = draw(st.integers(min_value=1, max_value=50))
    coords = draw(arrays(np.float64, (n, 2), elements=st.floats(-10, 10, allow_nan=False),
                         unique=False))
    coords = np.unique(np.round(coords, 6), axis=0)
    values = draw(arrays(np.float64, (len(coords),), elements=st.floats(-100, 100, allow_nan=False)))
    space = EuclideanPoints(coords).as_finite_space()
    start = draw(st.integers(min_value=0, max_value=len(coords) - 1))
    lam = draw(st.floats(min_value=1e-3, max_value=10))
    return space, ScalarField(space, values), start, lam


class TestEkelandPoint:

    def test_triangle_example(self, triangle):
        space, f = triangle
        result = ekeland_point(space, f, 2, 0.5)
        assert result.index == 0
        assert result.decrease == pytest.approx(1.0)
        assert result.strict_min_verified
        assert verify_ekeland(space, f, 2, result)

    def test_tiny_lambda_reaches_the_global_minimum(self, path3):
        space, f = path3
        result = ekeland_point(space, f, 2, 1e-6)
        assert result.index == 0

    def test_fixed_point(self, triangle):
        space, f = triangle
        result = ekeland_point(space, f, 0, 0.5)
        assert result.index == 0
        assert result.iterations == 0

    def test_lambda_must_be_positive(self, triangle):
        space, f = triangle
        with pytest.raises(InputError):
            ekeland_point(space, f, 0, 0)

    def test_finite_space_comparisons_are_exact(self):
        space = FiniteMetricSpace([[0, 1], [1, 0]])
        f = ScalarField(space, [1.0, 0.5 + 1e-13])
        result = ekeland_point(space, f, 0, 0.5)
        assert result.index == 0
        assert result.strict_min_verified
        assert verify_ekeland(space, f, 0, result)

    def test_near_miss_is_not_a_valid_move(self):
        space = FiniteMetricSpace([[0, 1], [1, 0]])
        f = ScalarField(space, [1.0, 0.5 + 1e-13])
        moved = EkelandResult(point='1', index=1, decrease=0.5 - 1e-13, lam=0.5, strict_min_verified=True,
                              decrease_margin=-1e-13, strict_margin=1.0, iterations=1)
        assert not verify_ekeland(space, f, 0, moved)

    def test_improper_field_is_rejected(self, triangle):
        space, _ = triangle
        f = ScalarField(space, [np.nan] * 3, proper=False)
        with pytest.raises(ImproperFunctionError):
            ekeland_point(space, f, 0, 1.0)

    @given(finite_problems())
    @settings(max_examples=200, deadline=None)
    def test_both_inequalities_hold_on_random_spaces(self, problem):
        space, f, start, lam = problem
        result = ekeland_point(space, f, start, lam)
        assert result.strict_min_verified
        assert verify_ekeland(space, f, start, result)


class TestSlopePerturbedMinimum:

    def test_exact_minimizer(self, triangle):
        space, f = triangle
        zero = ScalarField(space, np.zeros(3))
        x, report = slope_perturbed_min(space, f, zero, 0.1)
        assert x == 0
        assert report['slope'].value == 0
        assert report['holds']

    def test_square_with_linear_perturbation(self):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.01)
        f = ScalarField.sample(grid, Quadratic(1, 2.0))
        g = ScalarField.sample(grid, linear([1.0]))
        x, report = slope_perturbed_min(grid, f, g, 0.05)
        assert abs(grid.coords[x, 0] + 0.5) <= 0.25
        assert report['slope_bound_holds']
        assert report['value_bound_holds']

    def test_perturbation_must_be_real_valued(self, triangle):
        space, f = triangle
        g = ScalarField(space, [0.0, np.nan, 0.0])
        with pytest.raises(InputError):
            slope_perturbed_min(space, f, g, 0.1)
