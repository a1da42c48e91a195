import logging
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from marshmallow import fields, validate, ValidationError

from slopelab import app
from slopelab.api.catalog.helper import resolve_function
from slopelab.api.helper import StrictSchema, load_json, report_response
from slopelab.api.metric_space.helper import load_space
from slopelab.api.plr.helper import verify_series_bound
from slopelab.api.slope.helper import analytic_slopes, resolved_slope
from slopelab.api.validators import validate_positive, raise_on_errors
from slopelab.exceptions import InputError, PreconditionError
from slopelab.models import EuclideanPoints, ScalarField, PLUS_INF

log = logging.getLogger(__name__)

EMPTY_S = 'empty_S'
MAX_ITER = 'max_iter'
INFINITE_LENGTH = 'infinite_length'


class MultiMap:
    """
    Set-valued map on the points of a finite space. `rule(i)` returns the
    image as a sorted index array; `components` are named membership masks
    whose intersection is the image, kept for diagnostics.
    """

    def __init__(self, space, rule, components=None, name=None):
        self.space = space
        self.rule = rule
        self.components = components or {}
        self.name = name

    @staticmethod
    def from_sets(space, images, name=None):
        """
        Map given as {point id: [point ids]}; unlisted points map to the empty set.
        """
        table = {space.index(x): np.array(sorted(space.index(y) for y in ys), dtype=int)
                 for x, ys in images.items()}
        empty = np.array([], dtype=int)
        return MultiMap(space, lambda i: table.get(i, empty), name=name)

    @staticmethod
    def from_relation(space, related, name=None):
        """
        S(x_i) = {x_j : related(i, j)}.
        """
        def rule(i):
            return np.array([j for j in range(space.size) if related(i, j)], dtype=int)
        return MultiMap(space, rule, name=name)

    def __call__(self, i):
        return self.rule(i)

    def diagnostics(self, i):
        """
        Candidates each component keeps at x_i.
        """
        return {name: int(mask(i).sum()) for name, mask in self.components.items()}

    def __repr__(self):
        return f"<MultiMap(name='{self.name}', points={self.space.size})>"


@dataclass
class Orbit:
    points: list
    labels: list
    steps: list
    termination: str
    diagnostics: list = dataclass_field(default_factory=list)

    @property
    def length(self):
        return float(sum(self.steps))

    @property
    def end(self):
        return self.points[-1]

    def json(self):
        return {
            'points': self.labels,
            'steps': self.steps,
            'length': self.length,
            'termination': self.termination,
            'diagnostics': self.diagnostics
        }


def check_star_property(space, S):
    """
    Irreflexivity x not in S(x), checked at every point. The clause on
    infinite orbits is vacuous on a finite space: steps are bounded below by
    the smallest positive distance, so an infinite orbit has infinite length.
    """
    for i in range(space.size):
        if i in set(S(i).tolist()):
            return {'irreflexive': False, 'witness': space.labels[i], 'holds': False}

    return {
        'irreflexive': True,
        'witness': None,
        'infinite_orbit_clause': 'vacuous on finite spaces',
        'holds': True
    }


def run_orbit(space, S, x0, max_iter=None):
    """
    x_{n+1} = argmax over S(x_n) of d(y, x_n), lowest index among ties, until
    S(x_n) is empty. A revisited point means a periodic, hence infinite-length,
    orbit.
    """
    x0 = space.check_index(x0)
    max_iter = app.config['ORBIT']['max-iter-factor'] * space.size if max_iter is None else max_iter

    points, steps, diagnostics = [x0], [], []
    visited = {x0}
    termination = MAX_ITER

    for _ in range(max_iter):
        current = points[-1]
        image = S(current)
        if image.size == 0:
            termination = EMPTY_S
            break

        d = space.distances_from(current)[image]
        following = int(image[np.argmax(d)])
        diagnostics.append(dict(S.diagnostics(current), image=int(image.size)))
        points.append(following)
        steps.append(float(d.max()))

        if following in visited:
            termination = INFINITE_LENGTH
            break
        visited.add(following)

    if termination != EMPTY_S:
        log.warning("Orbit from '%s' stopped with %s after %d steps", space.labels[x0], termination, len(steps))

    orbit = Orbit(points, [space.labels[i] for i in points], steps, termination, diagnostics)
    log.debug("Orbit from '%s': %d steps, length %.6g, %s", space.labels[x0], len(steps), orbit.length, termination)
    return orbit


def check_consecutive_membership(orbit, S):
    """
    Index of the first step with x_{i+1} not in S(x_i), or None.
    """
    for k, (x, y) in enumerate(zip(orbit.points, orbit.points[1:])):
        if y not in set(S(x).tolist()):
            return k
    return None


def build_determination_map(space, f, g, slope_f, slope_g, eps, c, center):
    """
    S = S1 n S2 n S3 on points with finite slope_f, center excluded from the domain:
      S1(x) = {y : f(y) - g(y) < f(x) - g(x)}
      S2(x) = {y : f(y) < f(x) - eps d(y, x)}
      S3(x) = {y : slope_f(y) < slope_f(x) + 2c (2 + slope_f(x)) d(y, x)}
    """
    errors = {}
    validate_positive(eps, 'eps', errors)
    validate_positive(c, 'c', errors)
    raise_on_errors(errors)

    for field in (f, g, slope_f, slope_g):
        if field.space is not space:
            raise InputError("All fields of a determination map must live on its space.")

    center = space.check_index(center)
    live = f.finite & slope_f.finite
    for i in np.flatnonzero(live):
        if i != center and not slope_f.values[i] > eps:
            raise PreconditionError(f"Sharp-minimum gap fails: slope at '{space.labels[i]}' is "
                                    f"{slope_f.values[i]:.12g} <= eps = {eps:.12g}.", witness=space.labels[i])

    inf = np.inf
    fv = np.where(f.finite, f.values, inf)
    diff = np.where(f.finite & g.finite, f.values - g.values, inf)
    sv = np.where(slope_f.finite, slope_f.values, inf)

    def in_domain(i):
        return bool(live[i]) and i != center

    def s1(i):
        return diff < diff[i]

    def s2(i):
        return fv < fv[i] - eps * space.distances_from(i)

    def s3(i):
        return sv < sv[i] + 2 * c * (2 + sv[i]) * space.distances_from(i)

    def rule(i):
        if not in_domain(i):
            return np.array([], dtype=int)
        return np.flatnonzero(s1(i) & s2(i) & s3(i))

    return MultiMap(space, rule, components={'S1': s1, 'S2': s2, 'S3': s3}, name='determination')


def orbit_length_bound(orbit, f, eps):
    """
    Length <= f(x0) / eps for f >= 0, with the per-step telescoping check
    eps * d(x_{k+1}, x_k) <= f(x_k) - f(x_{k+1}).
    """
    errors = {}
    validate_positive(eps, 'eps', errors)
    raise_on_errors(errors)

    start = f.finite_value(orbit.points[0])
    bound = start / eps
    tolerance = app.config['TOLERANCE']['finite'] * (1 + abs(start))

    insufficient = []
    for k, (x, y, step) in enumerate(zip(orbit.points, orbit.points[1:], orbit.steps)):
        decrease = f.finite_value(x) - f.finite_value(y)
        if eps * step > decrease + tolerance:
            insufficient.append({'step': k, 'decrease': decrease, 'required': eps * step})

    holds = orbit.length <= bound + tolerance / eps and not insufficient
    return {
        'length': orbit.length,
        'bound': bound,
        'insufficient_steps': insufficient,
        'holds': bool(holds)
    }


def orbit_series_check(orbit, slope_f, c):
    """
    Steps and positive slopes along an orbit fed to verify_series_bound.
    """
    slopes = [slope_f.values[i] for i in orbit.points]
    positive = 0
    while positive < len(slopes) and slope_f.finite[orbit.points[positive]] and slopes[positive] > 0:
        positive += 1
    if positive == 0:
        return {'terms': 0, 'hypothesis_holds': True, 'holds': True}
    return verify_series_bound(orbit.steps[:max(positive - 1, 0)] or [0.0], slopes[:positive], c)


"""
Responses
"""


MAP_FILE = fields.Dict(keys=fields.Str(), values=fields.List(fields.Str()))


def load_map(space, source):
    """
    {point id: [point ids]} from a JSON file or dict.
    """
    data = load_json(source) if isinstance(source, str) else source
    try:
        images = MAP_FILE.deserialize(data)
    except ValidationError as e:
        raise InputError("Invalid map file: expected {point id: [point ids]}.", errors={'map': e.messages})
    return MultiMap.from_sets(space, images, name='file')


def slope_field(doc, name, slope_name=None):
    """
    A named slope field from the space file, analytic slopes of a catalog id
    on Euclidean spaces, else resolved slopes point by point.
    """
    if slope_name is not None:
        return doc.field(slope_name)

    space = doc.space
    if isinstance(space, EuclideanPoints) and name not in doc.fields:
        return analytic_slopes(space, resolve_function(name))

    f = doc.field(name)
    values = [resolved_slope(space, f, i).value if f.finite[i] else np.nan for i in range(space.size)]
    return ScalarField(space, [np.nan if v is PLUS_INF else v for v in values], name=f"slope({name})", proper=False)


class OrbitParamsSchema(StrictSchema):
    space = fields.Raw(required=True)
    start = fields.Str(required=True)
    map_name = fields.Raw(data_key='map', load_default='determination')
    f = fields.Str(allow_none=True, load_default=None)
    g = fields.Str(allow_none=True, load_default=None)
    slope_f = fields.Str(allow_none=True, load_default=None)
    slope_g = fields.Str(allow_none=True, load_default=None)
    eps = fields.Float(allow_none=True, load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    c = fields.Float(allow_none=True, load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    center = fields.Str(allow_none=True, load_default=None)


def orbit_response(space, start, map_name='determination', f=None, g=None, slope_f=None, slope_g=None,
                   eps=None, c=None, center=None, seed=None, threads=None):
    doc = load_space(space)
    x0 = doc.point(start)
    report = {}

    if map_name == 'determination':
        missing = [name for name, value in (('f', f), ('g', g), ('eps', eps), ('c', c), ('center', center))
                   if value is None]
        if missing:
            raise InputError("The determination map needs " + ', '.join(f"'{name}'" for name in missing) + '.')

        F, G = doc.field(f), doc.field(g)
        xc = doc.point(center)
        S = build_determination_map(doc.space, F, G, slope_field(doc, f, slope_f), slope_field(doc, g, slope_g),
                                    eps, c, xc)
        orbit = run_orbit(doc.space, S, x0)
        report['length_bound'] = orbit_length_bound(orbit, F.shifted(-F.finite_value(xc)), eps)
    else:
        S = load_map(doc.space, map_name)
        orbit = run_orbit(doc.space, S, x0)

    membership = check_consecutive_membership(orbit, S)
    report.update({
        'map': S.name,
        'orbit': orbit,
        'star_property': check_star_property(doc.space, S),
        'membership_violation': membership
    })

    passed = (orbit.termination == EMPTY_S and membership is None
              and report.get('length_bound', {'holds': True})['holds'])
    return report_response(report, passed)
