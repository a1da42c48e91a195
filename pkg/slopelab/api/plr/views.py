import click
from flask import Blueprint

from slopelab.api.helper import toolkit_command, common_options, parse_vector
from slopelab.api.plr.helper import plr_check_response, series_check_response, sharp_min_response

api_plr = Blueprint('api_plr', __name__, cli_group=None)

positive = click.FloatRange(min=0, min_open=True)


@api_plr.cli.command('plr-check')
@click.option('--catalog', 'entry', required=True, help='Catalog id.')
@click.option('--center', required=True, help='Comma-separated coordinates.')
@click.option('--c', 'c', required=True, type=positive)
@click.option('--delta', required=True, type=positive)
@click.option('--report', type=click.Path(dir_okay=False), default=None, help='Also write the report here.')
@common_options
@toolkit_command
def plr_check(entry, center, c, delta, report, seed, threads):
    return plr_check_response(entry, parse_vector(center, 'center'), c, delta, seed, threads)


@api_plr.cli.command('sharp-min')
@click.option('--catalog', 'entry', required=True, help='Catalog id.')
@click.option('--center', required=True, help='Comma-separated coordinates.')
@click.option('--c', 'c', required=True, type=positive)
@click.option('--delta', required=True, type=positive)
@click.option('--p', 'p', default=None, help='Subgradient with ||p|| < 1 (default: the min-norm one).')
@click.option('--report', type=click.Path(dir_okay=False), default=None, help='Also write the report here.')
@common_options
@toolkit_command
def sharp_min(entry, center, c, delta, p, report, seed, threads):
    p = None if p is None else parse_vector(p, 'p')
    return sharp_min_response(entry, parse_vector(center, 'center'), c, delta, p, seed, threads)


@api_plr.cli.command('series-check')
@click.option('--file', 'path', required=True, type=click.Path(dir_okay=False), help='Series file {a, b[, s]}.')
@click.option('--c', 'c', required=True, type=positive)
@click.option('--report', type=click.Path(dir_okay=False), default=None, help='Also write the report here.')
@common_options
@toolkit_command
def series_check(path, c, report, seed, threads):
    return series_check_response(path, c, seed, threads)
