import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import pdist
from marshmallow import fields, validate

from slopelab import app
from slopelab.exceptions import InputError, DomainError, PreconditionError
from slopelab.api.helper import StrictSchema, response
from slopelab.api.metric_space.helper import load_space
from slopelab.api.subdifferential.helper import slope_from_subdifferential
from slopelab.models import EuclideanPoints, ScalarField, SubdifferentialOracle, PLUS_INF

log = logging.getLogger(__name__)


@dataclass
class SlopeEstimate:
    value: object                       # float >= 0 or PLUS_INF
    resolution: Union[float, str]       # "exact" on finite spaces
    witness: Optional[str] = None
    capped: bool = False

    def json(self):
        return {
            'value': self.value,
            'resolution': self.resolution,
            'witness': self.witness,
            'capped': self.capped
        }


@dataclass
class LipEstimate:
    value: float
    region: dict
    degenerate: bool = False
    witness: Optional[list] = None

    def json(self):
        return {'value': self.value, 'region': self.region, 'degenerate': self.degenerate, 'witness': self.witness}


def local_slope_finite(space, f, x):
    """
    Local slope on a finite space. Once the radius drops below the smallest
    positive distance every punctured ball is empty, so the limsup is 0:
    every point of a finite space is isolated.
    """
    x = space.check_index(x)
    f.finite_value(x)
    return SlopeEstimate(0.0, 'exact')


def discrete_slope(space, f, x, eps, cap=None):
    """
    max over y in B(x, eps) \\ {x} with f(y) finite of [f(x) - f(y)]+ / d(x, y).
    Ties go to the nearest witness, then the lowest index.
    """
    if not eps > 0:
        raise InputError("Slope radius eps must be positive.")

    x = space.check_index(x)
    fx = f.finite_value(x)
    cap = app.config['SLOPE']['cap'] if cap is None else cap
    resolution = eps + space.spacing if space.spacing else eps

    d = space.distances_from(x)
    neighbours = np.flatnonzero((d <= eps) & f.finite)
    neighbours = neighbours[neighbours != x]

    if neighbours.size == 0:
        return SlopeEstimate(0.0, resolution)

    quotients = np.maximum(fx - f.values[neighbours], 0.0) / d[neighbours]
    best = quotients.max()

    if best <= 0:
        return SlopeEstimate(0.0, resolution)

    ties = neighbours[quotients >= best * (1 - app.config['TOLERANCE']['tie'])]
    witness = ties[np.lexsort((ties, d[ties]))[0]]

    if best > cap:
        log.warning("Slope at '%s' exceeds the cap %g; reporting +inf", space.labels[x], cap)
        return SlopeEstimate(PLUS_INF, resolution, space.labels[witness], capped=True)

    return SlopeEstimate(float(best), resolution, space.labels[witness])


def resolved_slope(space, f, x, eps=None):
    """
    The slope the toolkit uses on a given space: exact on finite spaces,
    discrete at radius eps (default eps-per-h * h) on sampled Euclidean sets.
    """
    if isinstance(space, EuclideanPoints) and space.spacing:
        eps = app.config['SLOPE']['eps-per-h'] * space.spacing if eps is None else eps
        return discrete_slope(space, f, x, eps)
    if eps is not None:
        return discrete_slope(space, f, x, eps)
    return local_slope_finite(space, f, x)


def lip_estimate(space, g, ball):
    """
    Largest pairwise difference quotient |g(y) - g(x)| / d(x, y) over the ball.
    """
    ball = np.asarray(ball)
    region = {'points': int(ball.size)}

    if ball.size < 2:
        return LipEstimate(0.0, region, degenerate=True)

    if not np.all(g.finite[ball]):
        i = ball[~g.finite[ball]][0]
        raise DomainError(f"Lipschitz estimate needs a finite field; +inf at '{space.labels[i]}'.",
                          witness=space.labels[i])

    values = g.values[ball]
    if isinstance(space, EuclideanPoints):
        distances = pdist(space.coords[ball])
    else:
        distances = squareform_upper(space.distance_matrix(ball))

    differences = pdist(values[:, np.newaxis], 'cityblock')
    quotients = differences / distances
    k = int(np.argmax(quotients))
    i, j = condensed_pair(k, ball.size)

    return LipEstimate(float(quotients[k]), region, witness=[space.labels[ball[i]], space.labels[ball[j]]])


def squareform_upper(matrix):
    return matrix[np.triu_indices(matrix.shape[0], k=1)]


def condensed_pair(k, n):
    rows, cols = np.triu_indices(n, k=1)
    return int(rows[k]), int(cols[k])


def check_slope_lip_at_min(space, f, g, x0, eps=None):
    """
    At a local minimum x0 of f + g the slope of f is bounded by lip g near x0.
    The local minimum is verified on the evaluated ball first.
    """
    x0 = space.check_index(x0)
    f.finite_value(x0)

    if eps is None:
        eps = app.config['SLOPE']['eps-per-h'] * space.spacing if space.spacing else space.diameter()

    total = f + g
    neighbourhood = space.ball(x0, eps)
    neighbourhood = neighbourhood[total.finite[neighbourhood]]
    lower = total.values[neighbourhood] < total.values[x0] - app.config['TOLERANCE']['ekeland']

    if lower.any():
        witness = neighbourhood[lower][np.argmin(total.values[neighbourhood][lower])]
        raise PreconditionError(f"'{space.labels[x0]}' is not a local minimum of f + g within radius {eps}.",
                                witness=space.labels[witness])

    slope = discrete_slope(space, f, x0, eps) if eps > 0 else local_slope_finite(space, f, x0)
    lip = lip_estimate(space, g, neighbourhood)
    slack = app.config['TOLERANCE']['finite'] * (1 + lip.value)
    holds = slope.value is not PLUS_INF and slope.value <= lip.value + slack

    return {
        'point': space.labels[x0],
        'eps': eps,
        'slope': slope,
        'lip': lip,
        'slack': slack,
        'holds': bool(holds)
    }


def analytic_slopes(space, function):
    """
    min-norm subgradient norms of a catalog function at every point of a Euclidean space.
    """
    oracle = SubdifferentialOracle.of(function)
    values = [slope_from_subdifferential(oracle, x) for x in space.coords]
    finite = [v is not PLUS_INF for v in values]
    return ScalarField(space, [v if v is not PLUS_INF else np.nan for v in values], finite,
                       name=f"slope({function.id})", proper=False)


def smooth_slope_error(space, function, x, eps):
    """
    |discrete slope - min-norm subgradient norm| at x, with the L (eps + h)
    bound it should respect. L = 1 + curvature + Lipschitz bound near x, the
    last term covering the angular resolution of the grid.
    """
    sampled = ScalarField.sample(space, function)
    discrete = discrete_slope(space, sampled, x, eps)
    analytic = slope_from_subdifferential(SubdifferentialOracle.of(function), space.coords[x])
    constant = 1 + function.curvature_on(space.coords[x], eps) + function.lipschitz_on(space.coords[x], eps)
    bound = constant * (eps + (space.spacing or 0))
    return abs(discrete.value - analytic), bound


def lip_distance_profile(space, x0, phi, dphi, radii):
    """
    g = phi(d(., x0)) for nondecreasing convex phi has lip g on B(x0; rho)
    at most phi'(rho). Checked with lip_estimate for each radius.
    """
    x0 = space.check_index(x0)
    d = space.distances_from(x0)
    g = ScalarField(space, phi(d), name='phi(d)')

    rows = []
    for rho in radii:
        if not rho > 0:
            raise InputError(f"Profile radii must be positive, got {rho!r}.")
        lip = lip_estimate(space, g, space.ball(x0, rho))
        allowed = float(dphi(rho))
        slack = app.config['TOLERANCE']['finite'] * (1 + allowed)
        rows.append({'radius': rho, 'lip': lip.value, 'allowed': allowed, 'holds': lip.value <= allowed + slack})

    return {'point': space.labels[x0], 'rows': rows, 'holds': all(row['holds'] for row in rows)}


"""
Responses
"""


class SlopeParamsSchema(StrictSchema):
    space = fields.Raw(required=True)
    field = fields.Str(required=True)
    point = fields.Str(required=True)
    eps = fields.Float(allow_none=True, load_default=None, validate=validate.Range(min=0, min_inclusive=False))


def slope_response(space, field, point, eps=None, seed=None, threads=None):
    doc = load_space(space)
    f = doc.field(field)
    x = doc.point(point)
    log.debug("Slope of '%s' at '%s' (eps=%s)", field, doc.space.labels[x], eps)

    estimate = resolved_slope(doc.space, f, x, eps)
    report = dict(estimate.json(), field=field, point=doc.space.labels[x], value_at_point=f.finite_value(x))
    return response(True, 0, payload={'report': report})
