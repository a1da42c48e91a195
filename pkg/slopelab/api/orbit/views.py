import click
from flask import Blueprint

from slopelab.api.helper import toolkit_command, common_options
from slopelab.api.orbit.helper import orbit_response

api_orbit = Blueprint('api_orbit', __name__, cli_group=None)


@api_orbit.cli.command('orbit')
@click.option('--space', required=True, type=click.Path(dir_okay=False), help='Space file.')
@click.option('--map', 'map_name', default='determination',
              help="'determination' or a map file {point id: [point ids]}.")
@click.option('--start', required=True, help='Start point.')
@click.option('--f', 'f', default=None, help='Field f of the determination map.')
@click.option('--g', 'g', default=None, help='Field g of the determination map.')
@click.option('--slope-f', default=None, help='Slope field of f (default: analytic or resolved slopes).')
@click.option('--slope-g', default=None, help='Slope field of g (default: analytic or resolved slopes).')
@click.option('--eps', type=click.FloatRange(min=0, min_open=True), default=None, help='Sharp-minimum gap.')
@click.option('--c', 'c', type=click.FloatRange(min=0, min_open=True), default=None)
@click.option('--center', default=None, help='Center point of the determination map.')
@click.option('--report', type=click.Path(dir_okay=False), default=None, help='Also write the report here.')
@common_options
@toolkit_command
def orbit(space, map_name, start, f, g, slope_f, slope_g, eps, c, center, report, seed, threads):
    return orbit_response(space, start, map_name, f, g, slope_f, slope_g, eps, c, center, seed, threads)
