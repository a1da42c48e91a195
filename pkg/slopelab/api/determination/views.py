import click
from flask import Blueprint

from slopelab.api.determination.helper import determine_response
from slopelab.api.helper import toolkit_command, common_options

api_determination = Blueprint('api_determination', __name__, cli_group=None)


@api_determination.cli.command('determine')
@click.option('--instance', required=True, help='Instance file, or the name of a shipped instance.')
@click.option('--h', 'h', type=click.FloatRange(min=0, min_open=True), default=None, help='Grid spacing.')
@click.option('--refine', is_flag=True, help='Refinement study: h0, h0/2, ... instead of a single run.')
@click.option('--h0', type=click.FloatRange(min=0, min_open=True), default=0.04, show_default=True)
@click.option('--halvings', type=click.IntRange(min=0, max=6), default=3, show_default=True)
@click.option('--report', type=click.Path(dir_okay=False), default=None, help='Also write the report here.')
@click.option('--csv', type=click.Path(dir_okay=False), default=None,
              help='Per-point table: point, f, g, f-g-a, slope_f, slope_g.')
@click.option('--plot', type=click.Path(dir_okay=False), default=None,
              help='Two-column plot data: (radius, max deviation), or (h, max deviation) with --refine.')
@common_options
@toolkit_command
def determine(instance, h, refine, h0, halvings, report, csv, plot, seed, threads):
    return determine_response(instance, h, refine, h0, halvings, seed, threads, csv, plot)
