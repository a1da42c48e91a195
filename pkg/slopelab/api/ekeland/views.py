import click
from flask import Blueprint

from slopelab.api.ekeland.helper import ekeland_response
from slopelab.api.helper import toolkit_command, common_options

api_ekeland = Blueprint('api_ekeland', __name__, cli_group=None)


@api_ekeland.cli.command('ekeland')
@click.option('--space', required=True, type=click.Path(dir_okay=False), help='Space file.')
@click.option('--field', required=True, help='Field name in the space file, or a catalog id on grids.')
@click.option('--start', default=None, help='Start point (required without --perturbation).')
@click.option('--lambda', 'lam', required=True, type=click.FloatRange(min=0, min_open=True),
              help='Penalty weight; eps of the perturbed minimum with --perturbation.')
@click.option('--perturbation', default=None, help='Real-valued field g for the slope-perturbed minimum of f + g.')
@common_options
@toolkit_command
def ekeland(space, field, start, lam, perturbation, seed, threads):
    return ekeland_response(space, field, lam, start, perturbation, seed, threads)
