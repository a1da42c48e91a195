import click
from flask import Blueprint

from slopelab.api.helper import toolkit_command, common_options
from slopelab.api.slope.helper import slope_response

api_slope = Blueprint('api_slope', __name__, cli_group=None)


@api_slope.cli.command('slope')
@click.option('--space', required=True, type=click.Path(dir_okay=False), help='Space file.')
@click.option('--field', required=True, help='Field name in the space file, or a catalog id on grids.')
@click.option('--point', required=True, help='Point id, or comma-separated coordinates on grids.')
@click.option('--eps', type=click.FloatRange(min=0, min_open=True), default=None,
              help='Slope radius (default: exact on finite spaces, 4h on grids).')
@common_options
@toolkit_command
def slope(space, field, point, eps, seed, threads):
    return slope_response(space, field, point, eps, seed, threads)
