import logging
from dataclasses import dataclass

import numpy as np
from marshmallow import fields, validate

from slopelab import app
from slopelab.api.helper import StrictSchema, report_response
from slopelab.api.metric_space.helper import load_space
from slopelab.api.slope.helper import resolved_slope, lip_estimate
from slopelab.api.validators import validate_positive, raise_on_errors
from slopelab.exceptions import InputError, ImproperFunctionError
from slopelab.models import FiniteMetricSpace

log = logging.getLogger(__name__)


@dataclass
class EkelandResult:
    point: str
    index: int
    decrease: float
    lam: float
    strict_min_verified: bool
    decrease_margin: float
    strict_margin: float
    iterations: int

    def json(self):
        return {
            'point': self.point,
            'index': self.index,
            'decrease': self.decrease,
            'lambda': self.lam,
            'strict_min_verified': self.strict_min_verified,
            'decrease_margin': self.decrease_margin,
            'strict_margin': self.strict_margin,
            'iterations': self.iterations
        }


def ekeland_point(space, f, x0, lam):
    """
    Moves to the minimizer of f over {x : f(x) + lam d(x, x_k) <= f(x_k)}
    (lowest index among ties) until that set is {x_k}. Each set is intersected
    with the previous ones, so the result lies in the set of x0 as computed.
    Comparisons are exact on finite spaces and carry a relative tolerance on
    sampled Euclidean sets.
    """
    errors = {}
    validate_positive(lam, 'lambda', errors)
    raise_on_errors(errors)

    if not f.finite.any():
        raise ImproperFunctionError(f"Field '{f.name or 'f'}' is identically +inf.")

    x0 = space.check_index(x0)
    f0 = f.finite_value(x0)
    tolerance = ekeland_tolerance(space)
    values = np.where(f.finite, f.values, np.inf)

    admissible = f.finite.copy()
    current, iterations = x0, 0
    while True:
        level = values[current] + tolerance * (1 + abs(values[current]))
        admissible &= values + lam * space.distances_from(current) <= level
        candidates = np.flatnonzero(admissible)
        candidates = candidates[candidates != current]
        if candidates.size == 0:
            break
        # argmin returns the first, hence lowest, index among equal values
        current = int(candidates[np.argmin(values[candidates])])
        iterations += 1

    fx = float(values[current])
    others = np.arange(space.size) != current
    penalized = values + lam * space.distances_from(current) - fx
    strict_margin = float(penalized[others].min()) if others.any() else float('inf')
    decrease = f0 - fx
    decrease_margin = decrease - lam * space.distance(current, x0)

    result = EkelandResult(
        point=space.labels[current],
        index=current,
        decrease=decrease,
        lam=float(lam),
        strict_min_verified=bool(strict_margin > 0),
        decrease_margin=decrease_margin,
        strict_margin=strict_margin,
        iterations=iterations
    )
    log.debug("Ekeland point from '%s' with lambda=%g: '%s' after %d moves",
              space.labels[x0], lam, result.point, iterations)
    return result


def ekeland_tolerance(space):
    return 0.0 if isinstance(space, FiniteMetricSpace) else app.config['TOLERANCE']['ekeland']


def verify_ekeland(space, f, x0, result):
    """
    Exhaustive check of both inequalities for a given result. No slack on
    finite spaces; elsewhere one tolerance per move on the decrease inequality.
    """
    tolerance = ekeland_tolerance(space) * (1 + float(np.nanmax(np.abs(f.values))))
    values = np.where(f.finite, f.values, np.inf)
    x = result.index
    others = np.arange(space.size) != x

    slack = (result.iterations + 1) * tolerance
    decrease_ok = values[x] + result.lam * space.distances_from(x0)[x] <= f.finite_value(x0) + slack
    strict_ok = bool(np.all(values[others] + result.lam * space.distances_from(x)[others] > values[x]))
    return decrease_ok and strict_ok


def epsilon_minimizer(space, total, eps):
    """
    Lowest-index point with (f+g)(x) <= inf(f+g) + eps.
    """
    values = np.where(total.finite, total.values, np.inf)
    return int(np.flatnonzero(values <= values.min() + eps)[0])


def slope_perturbed_min(space, f, g, eps, start=None, radius=None):
    """
    Ekeland with lam = eps applied to f + g from an eps-minimizer. The returned
    point satisfies slope f <= lip g + eps and (f+g)(x) <= inf(f+g) + eps.
    Slopes and Lipschitz moduli are measured at `radius` (default: the grid
    resolution; exact on finite spaces).
    """
    errors = {}
    validate_positive(eps, 'eps', errors)
    raise_on_errors(errors)

    if not g.finite.all():
        i = int(np.flatnonzero(~g.finite)[0])
        raise InputError(f"The perturbation must be real-valued; it is +inf at '{space.labels[i]}'.",
                         witness=space.labels[i])

    total = f + g
    if not total.finite.any():
        raise ImproperFunctionError("f + g is identically +inf.")

    start = epsilon_minimizer(space, total, eps) if start is None else space.check_index(start)
    result = ekeland_point(space, total, start, eps)
    x = result.index

    if radius is None and space.spacing:
        radius = app.config['SLOPE']['eps-per-h'] * space.spacing

    slope = resolved_slope(space, f, x, radius)
    if radius is None:
        lip = 0.0
    else:
        lip = lip_estimate(space, g, space.ball(x, radius)).value

    infimum = float(np.nanmin(total.values))
    gap = total.finite_value(x) - infimum
    tolerance = app.config['TOLERANCE']['finite'] * (1 + lip)
    slope_ok = slope.value <= lip + eps + tolerance
    value_ok = gap <= eps + tolerance

    report = {
        'start': space.labels[start],
        'ekeland': result,
        'eps': eps,
        'radius': radius if radius is not None else 'exact',
        'slope': slope,
        'lip': lip,
        'value_gap': gap,
        'slope_bound_holds': bool(slope_ok),
        'value_bound_holds': bool(value_ok),
        'holds': bool(slope_ok and value_ok and result.strict_min_verified)
    }
    log.info("Perturbed minimum at '%s': slope %s <= lip %g + eps %g: %s",
             result.point, slope.value, lip, eps, report['holds'])
    return x, report


"""
Responses
"""


class EkelandParamsSchema(StrictSchema):
    space = fields.Raw(required=True)
    field = fields.Str(required=True)
    start = fields.Str(allow_none=True, load_default=None)
    lam = fields.Float(required=True, data_key='lambda', validate=validate.Range(min=0, min_inclusive=False))
    perturbation = fields.Str(allow_none=True, load_default=None)


def ekeland_response(space, field, lam, start=None, perturbation=None, seed=None, threads=None):
    """
    Plain Ekeland point of `field` from `start`, or, with a perturbation
    field g, the slope-perturbed minimum of field + g with eps = lambda. The
    perturbed run starts from `start` when given (it should be an
    eps-minimizer), else from the lowest-index eps-minimizer.
    """
    doc = load_space(space)
    f = doc.field(field)
    x0 = None if start is None else doc.point(start)

    if perturbation is not None:
        _, report = slope_perturbed_min(doc.space, f, doc.field(perturbation), lam, start=x0)
        return report_response(report, report['holds'])

    if x0 is None:
        raise InputError("An Ekeland run needs a start point.")

    result = ekeland_point(doc.space, f, x0, lam)
    verified = verify_ekeland(doc.space, f, x0, result)
    report = dict(result.json(), start=doc.space.labels[x0], verified=verified)
    return report_response(report, verified)
