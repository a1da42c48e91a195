import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slopelab.api.catalog.helper import load_catalog
from slopelab.api.plr.helper import (
    Sampling,
    certify_plr,
    certify_regular_slope_analytic,
    scale_plr,
    add_convex_plr,
    sharp_min_transform,
    derived_constants,
    verify_series_bound,
    representation_sequence,
    bisect_plr_coefficient,
    check_slope_lsc,
    check_bounded_slope_continuity,
)
from slopelab.api.determination.helper import load_instance, shipped_instances
from slopelab.api.helper import load_json
from slopelab.api.subdifferential.helper import slope_from_subdifferential
from slopelab.api.slope.helper import analytic_slopes
from slopelab.exceptions import InputError, PreconditionError
from slopelab.models import EuclideanGrid, ScalarField, SubdifferentialOracle


CONVEX = [name for name, function in load_catalog().items() if function.convex]

# C^{1,1} entries: their gradients are Lipschitz with constant curvature_on
SMOOTH = ['half_sq_norm', 'neg_sq_norm', 'neg_half_sq_norm', 'neg_half_sq_plus_linear', 'aniso_quadratic', 'sq_1d']

POSITIVE = [name for name in shipped_instances() if load_instance(name).expected['equal_up_to_constant']]


@st.composite
def series(draw):
    """(a, b, c) with b[k+1] - b[k] = theta_k 2c (2 + b[k]) a[k] for theta_k in [0, 0.99]."""
    c = draw(st.floats(min_value=0.01, max_value=2.0))
    a = draw(st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=30))
    b = [draw(st.floats(min_value=0.01, max_value=100.0))]
    for step in a:
        theta = draw(st.floats(min_value=0.0, max_value=0.99))
        b.append(b[-1] + theta * 2 * c * (2 + b[-1]) * step)
    return a, b, c


@pytest.fixture(scope='module')
def catalog():
    return load_catalog()


@pytest.fixture
def sampling():
    return Sampling.from_config(seed=7, threads=1)


class TestCertificate:

    @pytest.mark.parametrize('name', CONVEX)
    @pytest.mark.parametrize('c', [0.1, 1.0, 10.0])
    @pytest.mark.parametrize('delta', [0.5, 1.0])
    def test_convex_entries_pass(self, catalog, sampling, name, c, delta):
        function = catalog[name]
        certificate = certify_plr(function, [0.2] * function.dim, c, delta, sampling)
        assert certificate.passed
        assert certificate.violation_count == 0

    def test_concave_square_passes_at_unit_coefficient(self, catalog, sampling):
        assert certify_plr(catalog['neg_sq_norm'], [0.0, 0.0], 1.0, 2.0, sampling).passed

    def test_concave_square_fails_below_it(self, catalog, sampling):
        certificate = certify_plr(catalog['neg_sq_norm'], [0.0, 0.0], 0.1, 2.0, sampling)
        assert certificate.status == 'fail'
        assert certificate.worst['margin'] < 0

    def test_thread_count_does_not_change_the_result(self, catalog):
        single = certify_plr(catalog['neg_sq_norm'], [0.0, 0.0], 0.1, 2.0, Sampling.from_config(3, 1))
        many = certify_plr(catalog['neg_sq_norm'], [0.0, 0.0], 0.1, 2.0, Sampling.from_config(3, 4))
        assert single.violation_count == many.violation_count
        assert (single.worst['x'], single.worst['y']) == (many.worst['x'], many.worst['y'])
        assert single.worst['margin'] == many.worst['margin']

    def test_coefficient_must_be_positive(self, catalog):
        with pytest.raises(InputError):
            certify_plr(catalog['norm_2d'], [0.0, 0.0], 0, 1.0)

    def test_regular_slope_of_the_concave_square(self, catalog, sampling):
        assert certify_regular_slope_analytic(catalog['neg_sq_norm'], [0.0, 0.0], 1.0, 1.0, sampling).passed
        assert not certify_regular_slope_analytic(catalog['neg_sq_norm'], [0.0, 0.0], 0.1, 1.0, sampling).passed

    @pytest.mark.parametrize('name', SMOOTH)
    @pytest.mark.parametrize('delta', [0.5, 1.0, 2.0])
    def test_smooth_entries_pass_at_half_the_gradient_constant(self, catalog, sampling, name, delta):
        function = catalog[name]
        center = [0.3] * function.dim
        c = function.curvature_on(center, delta) / 2
        assert certify_plr(function, center, c, delta, sampling).passed

    def test_regular_slope_of_the_concave_cube_fails_on_the_boundary(self, catalog, sampling):
        certificate = certify_regular_slope_analytic(catalog['neg_cube_norm'], [0.0, 0.0], 0.1, 2.0, sampling)
        assert certificate.status == 'fail'
        assert certificate.worst['margin'] < 0
        y = np.array(certificate.worst['y'].split(','), dtype=float)
        assert np.linalg.norm(y) == pytest.approx(2.0)

    def test_bisection_finds_the_threshold(self, catalog, sampling):
        result = bisect_plr_coefficient(catalog['neg_sq_norm'], [0.0, 0.0], 1.0, 0.1, 4.0, sampling=sampling)
        assert result['found']
        assert result['c'] == pytest.approx(1.0, abs=1e-4)


class TestTransforms:

    def test_scaling_keeps_the_certificate(self, catalog, sampling):
        source = certify_plr(catalog['neg_sq_norm'], [0.0, 0.0], 1.0, 1.0, sampling)
        assert scale_plr(source, 0.5).passed

    def test_scaling_a_failed_certificate_fails(self, catalog, sampling):
        source = certify_plr(catalog['neg_sq_norm'], [0.0, 0.0], 0.1, 2.0, sampling)
        assert scale_plr(source, 0.5).status == 'fail'

    def test_scale_factor_is_in_the_unit_interval(self, catalog, sampling):
        source = certify_plr(catalog['norm_2d'], [0.0, 0.0], 1.0, 1.0, sampling)
        with pytest.raises(InputError):
            scale_plr(source, 1.5)

    def test_adding_a_convex_norm(self, catalog, sampling):
        source = certify_plr(catalog['neg_sq_norm'], [0.0, 0.0], 1.0, 1.0, sampling)
        result = add_convex_plr(source, catalog['norm_2d'])
        assert result.passed
        assert result.c == pytest.approx(2.0)

    def test_adding_a_nonconvex_entry_is_rejected(self, catalog, sampling):
        source = certify_plr(catalog['norm_2d'], [0.0, 0.0], 1.0, 1.0, sampling)
        with pytest.raises(InputError):
            add_convex_plr(source, catalog['neg_sq_norm'])


class TestSharpMinimum:

    def test_derived_constants_are_exact(self):
        constants = derived_constants(1, 1)
        assert constants['c_prime'] == 6
        assert constants['delta_prime'] == Fraction(1, 9)
        assert constants['delta_hat'] == Fraction(1, 18)

    def test_decimal_inputs_stay_exact(self):
        constants = derived_constants(0.1, 0.3)
        assert constants['c_prime'] == Fraction(3, 5)
        assert constants['delta_prime'] == Fraction(3, 10)
        assert constants['delta_hat'] == Fraction(3, 20)

    @pytest.mark.parametrize('name', ['neg_half_sq_norm', 'linear_b'])
    def test_transform_has_a_sharp_minimum(self, catalog, sampling, name):
        _, c_prime, delta_prime, report = sharp_min_transform(catalog[name], [0.0, 0.0], 1.0, 1.0, sampling=sampling)
        assert report['minimum_holds']
        assert report['slope_holds']
        assert report['min_slope_off_center'] >= 1
        assert report['holds']
        assert (c_prime, delta_prime) == (6, Fraction(1, 9))

    @pytest.mark.parametrize('name', POSITIVE)
    def test_transform_of_every_determination_function(self, sampling, name):
        instance = load_instance(name)
        _, c_prime, delta_prime, report = sharp_min_transform(instance.f, instance.center, instance.c, instance.delta,
                                                              sampling=sampling)
        assert report['f1_center'] <= report['f1_sample_min'] + 1e-12
        assert report['min_slope_off_center'] >= 1 - 1e-6
        assert report['holds']
        assert c_prime == 6 * Fraction(instance.c)
        assert delta_prime == min(Fraction(instance.delta), 1 / (9 * Fraction(instance.c)))

    def test_unit_subgradient_is_rejected(self, catalog, sampling):
        with pytest.raises(PreconditionError):
            sharp_min_transform(catalog['linear_x1'], [0.0, 0.0], 1.0, 1.0, sampling=sampling)

    def test_non_plr_input_is_rejected(self, catalog, sampling):
        with pytest.raises(PreconditionError):
            sharp_min_transform(catalog['neg_sq_norm'], [0.0, 0.0], 0.1, 2.0, sampling=sampling)


class TestSeries:

    def test_planted_violation(self, resource):
        series = load_json(resource('fixtures', 'series_planted_violation.json'))
        report = verify_series_bound(series['a'], series['b'], 1)
        assert not report['hypothesis_holds']
        assert report['violation_index'] == 4

    def test_valid_series_stays_below_the_bound(self, resource):
        series = load_json(resource('fixtures', 'series_valid.json'))
        report = verify_series_bound(series['a'], series['b'], 1)
        assert report['hypothesis_holds']
        assert report['holds']
        assert report['max_term'] < report['bound']

    def test_single_term(self):
        report = verify_series_bound([], [2.0], 1)
        assert report['holds']
        assert report['b'] == 2.0

    def test_series_bound_must_cover_the_partial_sum(self):
        with pytest.raises(InputError):
            verify_series_bound([0.5, 0.5], [1.0, 1.1, 1.2], 1, s=0.5)

    def test_negative_steps_are_rejected(self):
        with pytest.raises(InputError):
            verify_series_bound([-0.1], [1.0, 1.1], 1)

    @given(series())
    @settings(max_examples=1000, deadline=None)
    def test_random_series_stay_below_the_bound(self, triple):
        a, b, c = triple
        report = verify_series_bound(a, b, c)
        assert report['hypothesis_holds']
        assert report['holds']
        assert max(b[1:]) < report['bound']

    @given(series(), st.data())
    @settings(max_examples=100, deadline=None)
    def test_planted_violations_are_found_where_they_are(self, triple, data):
        a, b, c = triple
        k = data.draw(st.integers(min_value=0, max_value=len(a) - 1))
        jump = data.draw(st.floats(min_value=0.01, max_value=1.0))
        b = b[:k + 1] + [b[k] + (1 + jump) * 2 * c * (2 + b[k]) * a[k]]
        report = verify_series_bound(a, b, c)
        assert not report['hypothesis_holds']
        assert report['violation_index'] == k


class TestRepresentation:

    @pytest.mark.parametrize('name, center', [
        ('linear_x1', [0.0, 0.0]),
        ('abs_1d', [0.5]),
        ('sq_1d', [1.0]),
        ('neg_sq_norm', [0.5, 0.0]),
        ('half_sq_norm', [0.6, 0.8]),
    ])
    def test_sequence_approaches_the_slope(self, catalog, name, center):
        function = catalog[name]
        r = slope_from_subdifferential(SubdifferentialOracle.of(function), center)
        first = math.ceil(1 / r) + 1

        report = representation_sequence(function, center, 1.0, n_max=first + 9, n_min=first)
        assert report['holds']
        assert [row['n'] for row in report['rows']] == list(range(first, first + 10))
        for row in report['rows']:
            assert row['quotient'] > r - 1 / row['n']
            assert row['distance'] < 1 / row['n']
            assert row['slope_gap_holds']

    def test_indices_below_the_slope_inverse_are_skipped(self, catalog):
        report = representation_sequence(catalog['linear_x1'], [0.0, 0.0], 1.0, n_max=2)
        assert report['rows'][0] == {'n': 1, 'status': 'out-of-range'}

    def test_zero_slope_center_is_rejected(self, catalog):
        with pytest.raises(PreconditionError):
            representation_sequence(catalog['half_sq_norm'], [0.0, 0.0], 1.0, n_max=3)

    def test_field_that_is_not_regularly_sloped_is_rejected(self, catalog):
        with pytest.raises(PreconditionError) as e:
            representation_sequence(catalog['neg_cube_norm'], [1.0, 0.0], 0.1, n_max=3)
        assert e.value.witness['margin'] < 0


class TestSlopeRegularity:

    def test_slope_is_lower_semicontinuous_at_the_kink(self, catalog):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.125)
        slopes = analytic_slopes(grid, catalog['abs_1d'])
        chain = [grid.locate([t]) for t in (0.5, 0.25, 0.125)]
        assert check_slope_lsc(slopes, chain, grid.center_index)['holds']

    def test_bounded_slope_continuity(self, catalog):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.125)
        f = ScalarField.sample(grid, catalog['sq_1d'])
        slopes = analytic_slopes(grid, catalog['sq_1d'])
        chain = [grid.locate([t]) for t in (0.5, 0.25, 0.125)]
        assert check_bounded_slope_continuity(f, slopes, chain, grid.center_index, 1.0)['holds']
