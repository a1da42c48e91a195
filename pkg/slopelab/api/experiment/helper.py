import logging

import click
from marshmallow import fields, validate

from slopelab.api.catalog.helper import CatalogListParamsSchema, catalog_list_response
from slopelab.api.determination.helper import DetermineParamsSchema, determine_response
from slopelab.api.ekeland.helper import EkelandParamsSchema, ekeland_response
from slopelab.api.helper import StrictSchema, load_json, parse, error_response, resolve_seed, resolve_threads
from slopelab.api.orbit.helper import OrbitParamsSchema, orbit_response
from slopelab.api.plr.helper import (
    PlrCheckParamsSchema,
    SeriesParamsSchema,
    SharpMinParamsSchema,
    plr_check_response,
    series_check_response,
    sharp_min_response,
)
from slopelab.api.slope.helper import SlopeParamsSchema, slope_response
from slopelab.exceptions import ToolkitError, InputError
from slopelab.helper import dumps, write_json

log = logging.getLogger(__name__)

# command -> (params schema, response builder, artifacts it can write)
HANDLERS = {
    'slope': (SlopeParamsSchema, slope_response, ()),
    'ekeland': (EkelandParamsSchema, ekeland_response, ()),
    'orbit': (OrbitParamsSchema, orbit_response, ()),
    'plr-check': (PlrCheckParamsSchema, plr_check_response, ()),
    'series-check': (SeriesParamsSchema, series_check_response, ()),
    'sharp-min': (SharpMinParamsSchema, sharp_min_response, ()),
    'determine': (DetermineParamsSchema, determine_response, ('csv', 'plot')),
    'catalog-list': (CatalogListParamsSchema, catalog_list_response, ()),
}


class ExperimentConfigSchema(StrictSchema):
    command = fields.Str(required=True, validate=validate.OneOf(sorted(HANDLERS)))
    params = fields.Dict(keys=fields.Str(), load_default=dict)
    seed = fields.Int(allow_none=True, load_default=None, validate=validate.Range(min=0, max=2 ** 64 - 1))
    threads = fields.Int(allow_none=True, load_default=None, validate=validate.Range(min=1))
    report = fields.Str(allow_none=True, load_default=None)
    csv = fields.Str(allow_none=True, load_default=None)
    plot = fields.Str(allow_none=True, load_default=None)
    description = fields.Str()


def dispatch(config, seed=None, threads=None):
    """
    Parses an experiment config (a path or a dict) and runs its command.
    seed and threads override the config values when given.
    Returns the response envelope; the report file is written when requested.
    """
    data = load_json(config) if isinstance(config, str) else config
    if isinstance(data, dict):
        overrides = {key: value for key, value in (('seed', seed), ('threads', threads)) if value is not None}
        data = dict(data, **overrides)
    experiment = parse(ExperimentConfigSchema(), data, source='experiment config')

    schema, handler, artifacts = HANDLERS[experiment['command']]
    params = parse(schema(), experiment['params'], source=f"'{experiment['command']}' parameters")

    outputs = {}
    for name in ('csv', 'plot'):
        if experiment[name] is None:
            continue
        if name not in artifacts:
            raise InputError(f"Command '{experiment['command']}' does not write a {name} file.")
        outputs[name] = experiment[name]

    log.debug("Experiment '%s' with %s", experiment['command'], sorted(params))
    resp = handler(**params, seed=resolve_seed(experiment['seed']), threads=resolve_threads(experiment['threads']),
                   **outputs)

    if experiment['report']:
        write_json(experiment['report'], resp)
    return resp


def run(config, seed=None, threads=None):
    """
    Runs an experiment config and returns the exit code: 0 on pass (a refused
    negative control included), 1 on a verified failure, 2 on input errors.
    """
    try:
        resp = dispatch(config, seed=seed, threads=threads)
    except ToolkitError as e:
        log.warning("Experiment failed: %s", e.message)
        click.echo(dumps(error_response(e)), err=True)
        return e.exit_code

    log.info("Experiment finished with status %s", resp['status'])
    click.echo(dumps(resp))
    return resp['status']
