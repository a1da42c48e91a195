import json

import pytest

from slopelab.api.experiment.helper import dispatch, run


def write_config(path, **config):
    path.write_text(json.dumps(config))
    return str(path)


class TestCommands:

    def test_determine_shifted_square(self, runner):
        result = runner.invoke(args=['determine', '--instance', 'shift_2p5', '--seed', '0'])
        assert result.exit_code == 0
        assert '"a": 2.5' in result.output
        assert '"status": "pass"' in result.output

    def test_determine_negative_control(self, runner):
        result = runner.invoke(args=['determine', '--instance', 'scaled'])
        assert result.exit_code == 0
        assert '"status": "refused"' in result.output

    def test_determine_writes_a_report(self, runner, tmp_path):
        report = tmp_path / 'out' / 'report.json'
        result = runner.invoke(args=['determine', '--instance', 'l1_identity', '--report', str(report)])
        assert result.exit_code == 0
        assert json.loads(report.read_text())['report']['status'] == 'pass'

    def test_plr_check_zero_coefficient_is_a_usage_error(self, runner):
        result = runner.invoke(args=['plr-check', '--catalog', 'neg_sq_norm', '--center', '0,0',
                                     '--c', '0', '--delta', '1'])
        assert result.exit_code == 2

    def test_plr_check_failure(self, runner):
        result = runner.invoke(args=['plr-check', '--catalog', 'neg_sq_norm', '--center', '0,0',
                                     '--c', '0.1', '--delta', '2'])
        assert result.exit_code == 1

    def test_plr_check_pass_reports_exact_constants(self, runner):
        result = runner.invoke(args=['plr-check', '--catalog', 'neg_sq_norm', '--center', '0,0',
                                     '--c', '1', '--delta', '1'])
        assert result.exit_code == 0
        assert '"delta_hat": "1/18"' in result.output

    def test_unknown_catalog_entry(self, runner):
        result = runner.invoke(args=['plr-check', '--catalog', 'nope', '--center', '0', '--c', '1', '--delta', '1'])
        assert result.exit_code == 2

    def test_series_check_planted_violation(self, runner, resource):
        result = runner.invoke(args=['series-check', '--file', resource('fixtures', 'series_planted_violation.json'),
                                     '--c', '1'])
        assert result.exit_code == 1
        assert '"violation_index": 4' in result.output

    def test_series_check_valid(self, runner, resource):
        result = runner.invoke(args=['series-check', '--file', resource('fixtures', 'series_valid.json'), '--c', '1'])
        assert result.exit_code == 0

    def test_sharp_min(self, runner):
        result = runner.invoke(args=['sharp-min', '--catalog', 'neg_half_sq_norm', '--center', '0,0',
                                     '--c', '1', '--delta', '1'])
        assert result.exit_code == 0
        assert '"c_prime": "6"' in result.output

    def test_slope_on_a_finite_space(self, runner, resource):
        result = runner.invoke(args=['slope', '--space', resource('spaces', 'path3.json'), '--field', 'f',
                                     '--point', '2', '--eps', '2'])
        assert result.exit_code == 0
        assert '"witness": "1"' in result.output

    def test_ekeland(self, runner, resource):
        result = runner.invoke(args=['ekeland', '--space', resource('spaces', 'triangle.json'), '--field', 'f',
                                     '--start', '2', '--lambda', '0.5'])
        assert result.exit_code == 0
        assert '"point": "0"' in result.output

    def test_ekeland_without_a_start(self, runner, resource):
        result = runner.invoke(args=['ekeland', '--space', resource('spaces', 'triangle.json'), '--field', 'f',
                                     '--lambda', '0.5'])
        assert result.exit_code == 2

    def test_orbit_on_a_map_file(self, runner, resource):
        result = runner.invoke(args=['orbit', '--space', resource('spaces', 'path3.json'),
                                     '--map', resource('maps', 'path_forward.json'), '--start', '0'])
        assert result.exit_code == 0
        assert '"length": 2.0' in result.output

    def test_catalog_list(self, runner):
        result = runner.invoke(args=['catalog-list'])
        assert result.exit_code == 0
        assert '"count": 19' in result.output


class TestExperiments:

    def test_malformed_config(self, runner, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"command": "determine",')
        result = runner.invoke(args=['experiment', '--config', str(path)])
        assert result.exit_code == 2

    def test_series_experiment(self, runner, tmp_path, resource):
        config = write_config(tmp_path / 'series.json', command='series-check',
                              params={'file': resource('fixtures', 'series_planted_violation.json'), 'c': 1})
        result = runner.invoke(args=['experiment', '--config', config])
        assert result.exit_code == 1

    def test_seed_option_overrides_the_config(self, runner, tmp_path):
        report = tmp_path / 'report.json'
        config = write_config(tmp_path / 'plr.json', command='plr-check', seed=3, report=str(report),
                              params={'catalog': 'norm_2d', 'center': [0, 0], 'c': 1, 'delta': 1})
        result = runner.invoke(args=['experiment', '--config', config, '--seed', '11'])
        assert result.exit_code == 0
        assert json.loads(report.read_text())['report']['sampling']['seed'] == 11

    def test_unknown_command(self, app):
        assert run({'command': 'launch', 'params': {}}) == 2

    def test_unknown_parameter(self, app):
        assert run({'command': 'catalog-list', 'params': {'colour': 'red'}}) == 2

    def test_csv_only_for_determination(self, app, tmp_path, resource):
        config = {'command': 'series-check', 'csv': str(tmp_path / 'rows.csv'),
                  'params': {'file': resource('fixtures', 'series_valid.json'), 'c': 1}}
        assert run(config) == 2

    def test_dispatch_returns_the_envelope(self, app):
        resp = dispatch({'command': 'catalog-list'})
        assert resp['status'] == 0
        assert resp['count'] == 19

    def test_run_applies_the_seed_override(self, app, tmp_path):
        report = tmp_path / 'report.json'
        config = {'command': 'plr-check', 'seed': 3, 'report': str(report),
                  'params': {'catalog': 'norm_2d', 'center': [0, 0], 'c': 1, 'delta': 1}}
        assert run(config, seed=5) == 0
        assert json.loads(report.read_text())['report']['sampling']['seed'] == 5

    @pytest.mark.parametrize('name', ['shift_2p5', 'perturbed_kink'])
    def test_determination_experiment(self, app, tmp_path, name):
        plot = tmp_path / 'profile.dat'
        assert run({'command': 'determine', 'params': {'instance': name}, 'plot': str(plot), 'seed': 0}) == 0
