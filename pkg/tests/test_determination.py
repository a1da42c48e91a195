import csv
from fractions import Fraction

import numpy as np
import pytest

from slopelab.api.determination.helper import (
    CSV_HEADER,
    load_instance,
    shipped_instances,
    verify_subdifferential_equality,
    determination_centers,
    run_determination,
    run_one_sided,
    slope_determination_core,
    refinement_study,
    determine_response,
)
from slopelab.api.plr.helper import Sampling
from slopelab.api.catalog.helper import load_catalog
from slopelab.api.slope.helper import analytic_slopes
from slopelab.exceptions import InputError
from slopelab.functions import ScaledNorm
from slopelab.models import EuclideanGrid, ScalarField

POSITIVE = [
    ('shift_2p5', 2.5),
    ('neg_sq_shift3', -3.0),
    ('l1_identity', 0.0),
    ('composite_shift1', 1.0),
    ('kink_shift3', -3.0),
    ('split_form', 0.0),
]

NEGATIVE = ['scaled', 'shifted_argument', 'perturbed_kink']


@pytest.fixture
def sampling():
    return Sampling.from_config(seed=0, threads=1)


class TestInstances:

    def test_every_instance_ships(self):
        assert set(shipped_instances()) == {name for name, _ in POSITIVE} | set(NEGATIVE)

    def test_unknown_instance(self):
        with pytest.raises(InputError):
            load_instance('no_such_instance')

    def test_radius_is_exact(self):
        assert load_instance('shift_2p5').delta_hat == Fraction(1, 18)

    def test_instance_with_mismatched_dimensions(self):
        data = {'name': 'mixed', 'f': 'abs_1d', 'g': 'norm_2d', 'center': [0.0], 'c': 1.0, 'delta': 1.0,
                'expected': {'equal_up_to_constant': False}}
        with pytest.raises(InputError):
            determine_response(data)

    def test_centers_cover_both_sides_of_every_axis(self):
        centers = determination_centers(np.zeros(2), 0.1)
        assert centers.tolist() == [[0, 0], [0.05, 0], [0, 0.05], [-0.05, 0], [0, -0.05]]


class TestGate:

    @pytest.mark.parametrize('name', NEGATIVE)
    def test_negative_controls_differ(self, sampling, name):
        gate = verify_subdifferential_equality(load_instance(name), sampling)
        assert not gate['equal']
        assert gate['witness'] is not None

    @pytest.mark.parametrize('name', [name for name, _ in POSITIVE])
    def test_positive_instances_agree(self, sampling, name):
        gate = verify_subdifferential_equality(load_instance(name), sampling)
        assert gate['equal']


class TestDetermination:

    @pytest.mark.parametrize('name, a', POSITIVE)
    def test_functions_differ_by_a_constant(self, sampling, name, a):
        report = run_determination(load_instance(name), sampling)
        assert report.passed
        assert report.a == pytest.approx(a)
        assert report.max_deviation <= report.tolerance
        assert report.expected_a_holds
        assert all(run['f_vs_g']['holds'] and run['g_vs_f']['holds'] for run in report.one_sided)

    @pytest.mark.parametrize('name', NEGATIVE)
    def test_negative_controls_are_refused(self, sampling, name):
        report = run_determination(load_instance(name), sampling)
        assert report.refused
        assert report.rows == []

    def test_grid_spacing_above_the_radius(self, sampling):
        with pytest.raises(InputError):
            run_determination(load_instance('shift_2p5'), sampling, h=0.5)

    def test_refinement_does_not_grow_the_deviation(self, sampling):
        study = refinement_study(load_instance('shift_2p5'), h0=0.04, halvings=2, sampling=sampling)
        assert study['monotone']
        assert study['holds']
        assert [step['h'] for step in study['steps']] == pytest.approx([0.04, 0.02, 0.01])

    def test_exact_shift_reports_the_floor(self, sampling):
        study = refinement_study(load_instance('shift_2p5'), h0=0.04, halvings=1, sampling=sampling)
        assert study['floor_reached']
        assert all(step['floor_reached'] for step in study['steps'])


class TestDetermineResponse:

    def test_positive_instance_writes_its_artifacts(self, tmp_path):
        table, plot = tmp_path / 'rows.csv', tmp_path / 'profile.dat'
        resp = determine_response('shift_2p5', seed=0, threads=1, csv=str(table), plot=str(plot))
        assert resp['status'] == 0
        assert resp['result']

        with open(table, newline='') as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) > 1
        assert plot.read_text().strip()

    def test_refused_negative_control_is_a_pass(self, tmp_path):
        table = tmp_path / 'rows.csv'
        resp = determine_response('scaled', seed=0, threads=1, csv=str(table))
        assert resp['status'] == 0
        assert not resp['result']
        assert not table.exists()


class TestOrbitCore:

    @pytest.fixture
    def kink(self):
        grid = EuclideanGrid(1, [0.0], 1.0, 0.125)
        function = ScaledNorm(1, 2.0, id='sharp')
        zero = ScalarField(grid, np.zeros(grid.size), name='zero')
        return grid, ScalarField.sample(grid, function), zero, analytic_slopes(grid, function)

    def test_every_orbit_ends_at_the_center(self, kink):
        grid, f, zero, slopes = kink
        report = slope_determination_core(grid, f, zero, slopes, zero, 1.0, grid.center_index)
        assert report['holds']
        assert all(run['all_at_center'] for run in report['dilations'])
        assert report['conclusion_margin'] >= 0

    def test_dominating_slope_of_g_breaks_the_hypothesis(self, kink):
        grid, f, zero, slopes = kink
        steep = ScalarField(grid, np.full(grid.size, 3.0))
        report = slope_determination_core(grid, f, zero, slopes, steep, 1.0, grid.center_index)
        assert not report['holds']
        assert report['hypothesis'] == 'slope_domination'

    def test_one_sided_run_off_the_center(self):
        catalog = load_catalog()
        f, g = catalog['half_sq_norm'], load_instance('shift_2p5').g
        report = run_one_sided(f, g, [0.02, 0.0], 1.0, 0.5, [0.0, 0.0])
        assert report['holds']
        assert report['margin'] == pytest.approx(0.0, abs=1e-12)
        assert 0 < report['alpha'] <= 1

    def test_one_sided_start_outside_the_ball(self):
        catalog = load_catalog()
        with pytest.raises(InputError):
            run_one_sided(catalog['half_sq_norm'], catalog['half_sq_norm'], [0.0, 0.0], 1.0, 0.5, [0.5, 0.0])
