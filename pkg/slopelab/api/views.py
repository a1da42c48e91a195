import click
from flask import Blueprint

from slopelab.api.experiment.helper import run
from slopelab.api.helper import common_options

api = Blueprint('api', __name__, cli_group=None)


@api.cli.command('experiment')
@click.option('--config', 'config', required=True, type=click.Path(dir_okay=False),
              help='Experiment config JSON: {command, params, seed, threads, report, csv, plot}.')
@common_options
@click.pass_context
def experiment(ctx, config, seed, threads):
    """
    Runs one experiment config through the same handlers as the commands.
    --seed and --threads override the config values when given.
    """
    ctx.exit(run(config, seed=seed, threads=threads))
