import logging
import os

from marshmallow import fields, validate, validates_schema, ValidationError

from slopelab import app
from slopelab.api.helper import StrictSchema, load_json, parse, response
from slopelab.exceptions import InputError
from slopelab.functions import (
    Quadratic,
    PowerNorm,
    ScaledNorm,
    WeightedL1,
    MaxOfQuadratics,
    MinOfQuadratics,
    Sum,
)

log = logging.getLogger(__name__)

KINDS = ('smooth', 'convex', 'composite', 'sum')

FORMS = {
    'smooth': ('quadratic', 'power'),
    'convex': ('quadratic', 'norm', 'l1'),
    'composite': ('max', 'min'),
    'sum': ('sum',),
}


"""
Schemas
"""


class PieceSchema(StrictSchema):
    A = fields.Raw(load_default=0.0)
    b = fields.List(fields.Float(), load_default=None)
    c0 = fields.Float(load_default=0.0)


class TermSchema(StrictSchema):
    weight = fields.Float(load_default=1.0)
    function = fields.Raw(required=True)


class ParamsSchema(StrictSchema):
    form = fields.Str(required=True, validate=validate.OneOf(sorted({f for forms in FORMS.values() for f in forms})))
    dim = fields.Int(validate=validate.Range(min=1, max=4))
    A = fields.Raw()
    b = fields.List(fields.Float())
    c0 = fields.Float()
    scale = fields.Float()
    power = fields.Float()
    center = fields.List(fields.Float())
    weights = fields.Raw()
    pieces = fields.List(fields.Nested(PieceSchema))
    terms = fields.List(fields.Nested(TermSchema))
    constant = fields.Float()
    offset = fields.List(fields.Float())

    @validates_schema
    def validate_form(self, data, **kwargs):
        if data['form'] != 'sum' and 'dim' not in data:
            raise ValidationError("'dim' is required.", 'dim')
        if data['form'] in ('max', 'min') and not data.get('pieces'):
            raise ValidationError("Composite forms need a nonempty 'pieces' list.", 'pieces')
        if data['form'] == 'sum' and not data.get('terms'):
            raise ValidationError("A sum needs a nonempty 'terms' list.", 'terms')


class CatalogEntrySchema(StrictSchema):
    id = fields.Str(required=True, validate=validate.Length(min=1))
    kind = fields.Str(required=True, validate=validate.OneOf(KINDS))
    params = fields.Nested(ParamsSchema, required=True)
    lipschitz_flag = fields.Bool(required=True)
    f_regular_flag = fields.Bool(required=True)
    description = fields.Str()

    @validates_schema
    def validate_kind_form(self, data, **kwargs):
        if data['params']['form'] not in FORMS[data['kind']]:
            allowed = ', '.join(f"'{form}'" for form in FORMS[data['kind']])
            raise ValidationError(f"Kind '{data['kind']}' allows forms {allowed}.", 'params')


"""
Construction
"""


def build_function(entry, registry):
    """
    Builds the analytic function of a parsed catalog entry. `registry` resolves
    ids used by sum terms.
    """
    params = entry['params']
    form = params['form']
    dim = params.get('dim')
    id = entry['id']

    if form == 'quadratic':
        function = Quadratic(dim, params.get('A', 0.0), params.get('b'), params.get('c0', 0.0), id=id)
    elif form == 'power':
        function = PowerNorm(dim, params.get('scale', 1.0), params.get('power', 2.0), params.get('center'), id=id)
    elif form == 'norm':
        function = ScaledNorm(dim, params.get('scale', 1.0), params.get('center'), id=id)
    elif form == 'l1':
        function = WeightedL1(dim, params.get('weights', 1.0), params.get('center'), id=id)
    elif form in ('max', 'min'):
        pieces = [Quadratic(dim, piece['A'], piece['b'], piece['c0']) for piece in params['pieces']]
        composite = MaxOfQuadratics if form == 'max' else MinOfQuadratics
        function = composite(dim, pieces, id=id)
    else:
        terms = [(term['weight'], resolve_function(term['function'], registry)) for term in params['terms']]
        function = Sum(terms, params.get('constant', 0.0), params.get('offset'), id=id)

    check_flags(entry, function)
    function.kind = entry['kind']
    return function


def check_flags(entry, function):
    errors = {}

    if entry['kind'] == 'convex' and not function.convex:
        errors['kind'] = f"Entry '{entry['id']}' is declared convex but its expression is not."

    if entry['lipschitz_flag'] != function.lipschitz:
        errors['lipschitz_flag'] = f"Entry '{entry['id']}' declares lipschitz_flag={entry['lipschitz_flag']}."

    if entry['f_regular_flag'] != function.f_regular:
        errors['f_regular_flag'] = f"Entry '{entry['id']}' declares f_regular_flag={entry['f_regular_flag']}, " \
                                   f"its expression gives {function.f_regular}."

    if errors:
        raise InputError(f"Catalog flags of '{entry['id']}' disagree with the expression.", errors=errors)


def resolve_function(reference, registry=None):
    """
    A function reference is either a catalog id or an inline catalog entry.
    """
    registry = load_catalog() if registry is None else registry

    if isinstance(reference, str):
        if reference not in registry:
            raise InputError(f"Unknown catalog entry '{reference}'.", witness=reference)
        return registry[reference]

    if isinstance(reference, dict):
        entry = parse(CatalogEntrySchema(), reference, source='inline catalog entry')
        return build_function(entry, registry)

    raise InputError("A function reference must be a catalog id or an inline entry.")


_catalogs = {}


def load_catalog(path=None):
    """
    Returns {id: function} in file order. Parsed catalogs are cached per path.
    """
    path = os.path.abspath(path or app.config['CATALOG_FILE'])

    if path not in _catalogs:
        data = load_json(path)
        if not isinstance(data, list):
            raise InputError(f"Catalog '{path}' must be a JSON list of entries.")

        registry = {}
        for position, raw in enumerate(data):
            entry = parse(CatalogEntrySchema(), raw, source=f"catalog entry #{position}")
            if entry['id'] in registry:
                raise InputError(f"Duplicate catalog id '{entry['id']}'.", witness=entry['id'])
            registry[entry['id']] = build_function(entry, registry)

        log.debug("Loaded %d catalog entries from %s", len(registry), path)
        _catalogs[path] = registry

    return _catalogs[path]


def catalog_dto(function):
    return function.json()


def catalog_listing(path=None):
    return [catalog_dto(function) for function in load_catalog(path).values()]


class CatalogListParamsSchema(StrictSchema):
    catalog = fields.Str(allow_none=True, load_default=None)


def catalog_list_response(catalog=None, seed=None, threads=None):
    listing = catalog_listing(catalog)
    return response(True, 0, payload={'catalog': listing, 'count': len(listing)})
