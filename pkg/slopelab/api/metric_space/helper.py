import logging

import numpy as np
from marshmallow import fields, validate, validates_schema, ValidationError

from slopelab import app
from slopelab.api.catalog.helper import resolve_function
from slopelab.api.helper import StrictSchema, load_json, parse, parse_vector
from slopelab.exceptions import InputError
from slopelab.models import FiniteMetricSpace, EuclideanGrid, EuclideanPoints, ScalarField

log = logging.getLogger(__name__)


def ball(space, x, r, open_ball=False):
    """
    Points of the (closed by default) ball around point index `x`.
    """
    return space.ball(x, r, open_ball=open_ball)


def sublevel_restrict(space, f, x0):
    """
    Restricts f to Y = {x : f(x) <= f(x0)}. Returns (subspace, restricted field, indices into space).
    """
    x0 = space.check_index(x0)
    if not f.finite[x0]:
        raise InputError(f"Sublevel restriction needs f(x0) finite; f is +inf at '{space.labels[x0]}'.",
                         witness=space.labels[x0])

    level = f.values[x0]
    indices = np.flatnonzero(f.finite & (np.nan_to_num(f.values, nan=np.inf) <= level))
    subspace = space.subspace(indices)
    log.debug("Sublevel set at '%s' keeps %d of %d points", space.labels[x0], indices.size, space.size)
    return subspace, f.restrict(indices, subspace), indices


"""
Space files
"""


class GridSchema(StrictSchema):
    dim = fields.Int(required=True, validate=validate.Range(min=1, max=4))
    center = fields.List(fields.Float(), required=True)
    radius = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    h = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))


class SpaceSchema(StrictSchema):
    points = fields.List(fields.Raw())
    dist = fields.List(fields.List(fields.Float()))
    grid = fields.Nested(GridSchema)
    fields_ = fields.Dict(keys=fields.Str(), values=fields.List(fields.Raw()), data_key='fields')
    description = fields.Str()

    @validates_schema
    def validate_kind(self, data, **kwargs):
        explicit = 'points' in data or 'dist' in data
        if explicit == ('grid' in data):
            raise ValidationError("A space is either 'points' + 'dist' or a 'grid', not both or neither.")
        if explicit and not ('points' in data and 'dist' in data):
            raise ValidationError("Explicit spaces need both 'points' and 'dist'.")


class SpaceDocument:
    """
    A parsed space file: the space and its named fields (catalog ids on grids).
    """

    def __init__(self, space, fields=None):
        self.space = space
        self.fields = fields or {}

    def field(self, name):
        if name in self.fields:
            return ScalarField.from_entries(self.space, self.fields[name], name=name)
        if isinstance(self.space, EuclideanPoints):
            function = resolve_function(name)
            if function.dim != self.space.dim:
                raise InputError(f"Catalog entry '{name}' has dimension {function.dim}, "
                                 f"the grid has dimension {self.space.dim}.")
            return ScalarField.sample(self.space, function, name=name)
        raise InputError(f"Unknown field '{name}'.", witness=name)

    def point(self, text):
        return parse_point(self.space, text)


def load_space(source):
    data = load_json(source) if isinstance(source, str) else source
    doc = parse(SpaceSchema(), data, source='space file')

    if 'grid' in doc:
        grid = doc['grid']
        space = EuclideanGrid(grid['dim'], grid['center'], grid['radius'], grid['h'])
    else:
        space = FiniteMetricSpace(doc['dist'], doc['points'], tolerance=app.config['TOLERANCE']['triangle'])

    log.debug("Loaded %r", space)
    return SpaceDocument(space, doc.get('fields_'))


def parse_point(space, text):
    """
    Point ids on explicit spaces, comma-separated coordinates on Euclidean ones.
    """
    if isinstance(space, EuclideanPoints):
        tolerance = 1e-9 + 1e-6 * (space.spacing or 0)
        return space.locate(parse_vector(text, 'point'), tolerance)
    return space.index(text)
