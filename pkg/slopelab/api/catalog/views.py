import click
from flask import Blueprint

from slopelab.api.catalog.helper import catalog_list_response
from slopelab.api.helper import toolkit_command, common_options

api_catalog = Blueprint('api_catalog', __name__, cli_group=None)


@api_catalog.cli.command('catalog-list')
@click.option('--catalog', type=click.Path(dir_okay=False), default=None,
              help='Catalog file (default: the shipped catalog).')
@common_options
@toolkit_command
def catalog_list(catalog, seed, threads):
    return catalog_list_response(catalog, seed, threads)
