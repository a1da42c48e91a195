import math

from slopelab.exceptions import InputError


def is_positive(value):
    return isinstance(value, (int, float)) and math.isfinite(value) and value > 0


def validate_positive(value, name, errors):
    if not is_positive(value):
        errors[name] = f"'{name}' must be a positive finite number, got {value!r}."


def validate_open_unit_interval(value, name, errors):
    if not (isinstance(value, (int, float)) and 0 < value < 1):
        errors[name] = f"'{name}' must lie in the open interval (0, 1), got {value!r}."


def validate_sequence(values, name, errors, strictly_positive=False):
    bad = [i for i, v in enumerate(values)
           if not math.isfinite(v) or v < 0 or (strictly_positive and v == 0)]
    if bad:
        kind = 'positive' if strictly_positive else 'nonnegative'
        errors[name] = f"'{name}' must contain {kind} finite numbers; first offending index is {bad[0]}."


def raise_on_errors(errors):
    if errors:
        raise InputError("Invalid parameters.", errors=errors)
