import json
import logging
from functools import wraps

import click
from marshmallow import Schema, ValidationError, RAISE

from slopelab import app
from slopelab.exceptions import ToolkitError, InputError
from slopelab.helper import dumps, write_json

log = logging.getLogger(__name__)


class StrictSchema(Schema):
    """
    Base schema for every file the toolkit reads: unknown keys are an error.
    """
    class Meta:
        unknown = RAISE


def load_json(path):
    try:
        with open(path, encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(f"File '{path}' not found.", witness=str(path))
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON in '{path}' at line {e.lineno}, column {e.colno}: {e.msg}.",
                         errors={'line': e.lineno, 'column': e.colno})


def parse(schema, data, source='input'):
    try:
        return schema.load(data)
    except ValidationError as e:
        raise InputError(f"Invalid {source}.", errors=e.messages)


def response(result, status_code, message=None, errors=None, payload=None):
    resp = {
        'result': result,
        'status': status_code
    }

    if message:
        resp['message'] = message

    if errors:
        resp['errors'] = errors

    if payload and isinstance(payload, dict):
        resp = dict(resp, **payload)

    return resp


def report_response(report, passed, message=None, expected_failure=False):
    """
    Exit 0 on pass, 1 on a verified failure. A failure the caller expected
    (a negative control) counts as a pass.
    """
    ok = passed or expected_failure
    return response(passed, 0 if ok else 1, message=message, payload={'report': report})


def error_response(error: ToolkitError):
    return response(False, error.exit_code, message=f"{error.name}: {error.message}",
                    errors=error.errors, payload={'witness': error.witness} if error.witness is not None else None)


def emit(resp, report_path=None):
    if report_path:
        write_json(report_path, resp)
    click.echo(dumps(resp))


def toolkit_command(f):
    """
    Decorator for command callbacks: the callback returns a response envelope
    which is printed (and saved when the command has a --report option).
    Toolkit errors become an error envelope on stderr. Either way the process
    exits with the envelope's status.
    """
    @wraps(f)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            resp = f(*args, **kwargs)
            emit(resp, kwargs.get('report'))
        except ToolkitError as e:
            log.warning("%s failed: %s", ctx.info_name, e.message)
            click.echo(dumps(error_response(e)), err=True)
            ctx.exit(e.exit_code)
        else:
            log.info("%s finished with status %s", ctx.info_name, resp['status'])
            ctx.exit(resp['status'])
    return wrapper


def common_options(f):
    """
    --seed and --threads, shared by every subcommand.
    """
    f = click.option('--threads', type=click.IntRange(min=1), default=None,
                     help='Worker threads for sweeps (default from config).')(f)
    f = click.option('--seed', type=click.IntRange(min=0, max=2 ** 64 - 1), default=None,
                     help='Random seed (default from config).')(f)
    return f


def resolve_seed(seed):
    return app.config['SEED'] if seed is None else seed


def resolve_threads(threads):
    return app.config['THREADS'] if threads is None else threads


def parse_vector(text, name='vector'):
    try:
        return [float(v) for v in str(text).split(',') if v.strip()]
    except ValueError:
        raise InputError(f"Cannot read {name} '{text}': expected comma-separated numbers.")
