import logging
import os
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np
from marshmallow import fields, validate

from slopelab import app
from slopelab.api.catalog.helper import resolve_function
from slopelab.api.helper import StrictSchema, load_json, parse, report_response
from slopelab.api.metric_space.helper import sublevel_restrict
from slopelab.api.orbit.helper import (
    build_determination_map,
    run_orbit,
    orbit_length_bound,
    orbit_series_check,
    check_consecutive_membership,
)
from slopelab.api.plr.helper import Sampling, certify_plr, check_sharp_minimum, perturbation, field_tolerance
from slopelab.api.slope.helper import analytic_slopes
from slopelab.api.subdifferential.helper import min_norm_element, direction_fan, support_gap
from slopelab.exceptions import InputError, PreconditionError, CoverageError, HypothesisScaleMismatch
from slopelab.functions import Sum
from slopelab.helper import exact, make_rng, parallel_map, write_csv, write_plot_data
from slopelab.models import EuclideanGrid, ScalarField, as_point, format_point

log = logging.getLogger(__name__)


"""
Instances
"""


class ExpectedSchema(StrictSchema):
    equal_up_to_constant = fields.Bool(required=True)
    a = fields.Float(allow_none=True, load_default=None)


class InstanceSchema(StrictSchema):
    name = fields.Str(required=True, validate=validate.Length(min=1))
    description = fields.Str()
    f = fields.Raw(required=True)
    g = fields.Raw(required=True)
    center = fields.List(fields.Float(), required=True, validate=validate.Length(min=1, max=4))
    c = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    delta = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))
    expected = fields.Nested(ExpectedSchema, required=True)


@dataclass
class DeterminationInstance:
    name: str
    f: object
    g: object
    center: np.ndarray
    c: float
    delta: float
    expected: dict
    description: str = ''

    @staticmethod
    def from_dict(data):
        doc = parse(InstanceSchema(), data, source='instance file')
        f, g = resolve_function(doc['f']), resolve_function(doc['g'])
        if f.dim != g.dim:
            raise InputError(f"f has dimension {f.dim}, g has dimension {g.dim}.")
        return DeterminationInstance(
            name=doc['name'],
            f=f,
            g=g,
            center=as_point(doc['center'], f.dim),
            c=doc['c'],
            delta=doc['delta'],
            expected=doc['expected'],
            description=doc.get('description', '')
        )

    @property
    def delta_hat(self):
        return min(exact(self.delta) / 2, 1 / (18 * exact(self.c)))

    def json(self):
        return {
            'name': self.name,
            'f': self.f.id,
            'g': self.g.id,
            'center': self.center,
            'c': self.c,
            'delta': self.delta,
            'expected': self.expected
        }


def load_instance(reference):
    """
    A path to an instance file, or the name of a shipped instance.
    """
    path = reference
    if not os.path.exists(path):
        path = os.path.join(app.config['INSTANCES_DIR'], f"{reference}.json")
        if not os.path.exists(path):
            raise InputError(f"Unknown instance '{reference}'.", witness=reference)
    return DeterminationInstance.from_dict(load_json(path))


def shipped_instances():
    return sorted(name[:-5] for name in os.listdir(app.config['INSTANCES_DIR']) if name.endswith('.json'))


"""
Subdifferential gate
"""


def verify_subdifferential_equality(instance, sampling=None):
    """
    df = dg at sampled points of the open delta-ball, compared through their
    support functions on a direction fan.
    """
    sampling = Sampling.from_config() if sampling is None else sampling
    f, g = instance.f, instance.g
    grid = sampling.ball(f.dim, instance.center, instance.delta)
    directions = direction_fan(f.dim, rng=make_rng(sampling.seed))
    tolerance = app.config['TOLERANCE']['support']

    witness, largest = None, 0.0
    for i, x in enumerate(grid.coords):
        Sf, Sg = f.subdifferential(x), g.subdifferential(x)
        if Sf is None or Sg is None:
            raise CoverageError(f"An oracle is undefined at {grid.labels[i]} inside the ball.",
                                witness=grid.labels[i])
        gap = support_gap(Sf, Sg, directions)
        scale = 1 + float(np.max(np.abs(np.concatenate([Sf.vertices.ravel(), Sg.vertices.ravel()]))))
        if gap > tolerance * scale and witness is None:
            witness = {'point': grid.labels[i], 'gap': gap, 'df': Sf, 'dg': Sg}
        largest = max(largest, gap)

    report = {
        'equal': witness is None,
        'points': grid.size,
        'directions': int(directions.shape[0]),
        'max_support_gap': largest,
        'witness': witness
    }
    log.info("Subdifferential gate for '%s': equal=%s", instance.name, report['equal'])
    return report


"""
Orbit core
"""


def slope_determination_core(space, f, g, slope_f, slope_g, c, center, dilations=None, threads=1):
    """
    Hypotheses: slope_g <= slope_f, the mixed inequality
    g(y) >= g(x) - slope_f(x) d - c (slope_f(x) + 1) d^2 and a sharp minimum
    of f at the center. Then, for each dilation t, orbits of the determination
    map built from (1 + t) f run from every point; each must end at the center.
    The conclusion f(x) - f(center) >= g(x) - g(center) is checked pointwise.
    """
    dilations = app.config['DETERMINATION']['dilations'] if dilations is None else dilations
    center = space.check_index(center)

    f = f.shifted(-f.finite_value(center))
    g = g.shifted(-g.finite_value(center))
    tolerance = field_tolerance(np.concatenate([f.values[f.finite], g.values[g.finite]]))
    report = {'points': space.size, 'c': c, 'tolerance': tolerance}

    live = np.flatnonzero(f.finite & slope_f.finite & slope_g.finite)
    excess = slope_g.values[live] - slope_f.values[live]
    if excess.size and excess.max() > tolerance:
        i = live[int(np.argmax(excess))]
        return dict(report, holds=False, hypothesis='slope_domination', witness=space.labels[i],
                    excess=float(excess.max()))

    mixed = mixed_inequality_witness(space, g, slope_f, c, tolerance)
    if mixed is not None:
        return dict(report, holds=False, hypothesis='mixed_inequality', witness=mixed)

    sharp = check_sharp_minimum(f, slope_f, center)
    report['sharp_minimum'] = sharp
    if not sharp['sharp']:
        return dict(report, holds=False, hypothesis='sharp_minimum', witness=sharp['argmin'])

    others = np.array([i for i in range(space.size) if i != center and f.finite[i] and slope_f.finite[i]], dtype=int)
    if others.size == 0:
        conclusion = float(np.min(f.values[f.finite & g.finite] - g.values[f.finite & g.finite]))
        return dict(report, holds=conclusion >= -tolerance, conclusion_margin=conclusion, dilations=[],
                    note='the sample has no point besides the center')

    distances = space.distances_from(center)[others]
    runs = []
    for t in dilations:
        f_t = f.scaled(1 + t)
        slope_t = slope_f.scaled(1 + t)
        eps = 0.5 * min(float(slope_t.values[others].min()), float(np.min(f_t.values[others] / distances)))
        if not eps > 0:
            runs.append({'dilation': t, 'eps': eps, 'holds': False, 'reason': 'no positive sharp-minimum gap'})
            continue
        runs.append(dilation_run(space, f_t, g, slope_t, slope_g, eps, c, center, threads, tolerance, t))

    difference = f.values - g.values
    both = f.finite & g.finite
    conclusion = float(np.min(difference[both]))

    holds = all(run['holds'] for run in runs) and conclusion >= -tolerance
    return dict(report, holds=bool(holds), dilations=runs, conclusion_margin=conclusion)


def mixed_inequality_witness(space, g, slope_f, c, tolerance):
    for i in np.flatnonzero(g.finite & slope_f.finite):
        d = space.distances_from(i)
        s = slope_f.values[i]
        margins = np.where(g.finite, g.values - g.values[i] + s * d + c * (s + 1) * d ** 2, np.inf)
        j = int(np.argmin(margins))
        if margins[j] < -tolerance:
            return {'x': space.labels[i], 'y': space.labels[j], 'margin': float(margins[j])}
    return None


def dilation_run(space, f, g, slope_f, slope_g, eps, c, center, threads, tolerance, t):
    S = build_determination_map(space, f, g, slope_f, slope_g, eps, c, center)
    starts = [i for i in range(space.size) if f.finite[i]]

    def check(start):
        orbit = run_orbit(space, S, start)
        differences = [f.values[i] - g.values[i] for i in orbit.points]
        descent = all(b < a for a, b in zip(differences, differences[1:]))
        length = orbit_length_bound(orbit, f, eps)
        series = orbit_series_check(orbit, slope_f, c)
        membership = check_consecutive_membership(orbit, S)
        return {
            'start': space.labels[start],
            'end': orbit.labels[-1],
            'steps': len(orbit.steps),
            'length': orbit.length,
            'length_bound': length['bound'],
            'at_center': orbit.end == center,
            'length_holds': length['holds'],
            's1_descent': descent,
            'series_holds': series['holds'] and series['hypothesis_holds'],
            'membership_holds': membership is None,
            'start_margin': float(differences[0]),
            'termination': orbit.termination
        }

    orbits = parallel_map(check, starts, threads)
    failed = [o for o in orbits if not (o['at_center'] and o['length_holds'] and o['s1_descent']
                                        and o['series_holds'] and o['membership_holds']
                                        and o['start_margin'] >= -tolerance)]
    if failed:
        log.warning("Dilation %g: %d of %d orbits fail, first from '%s'", t, len(failed), len(orbits), failed[0]['start'])

    return {
        'dilation': t,
        'eps': eps,
        'orbits': len(orbits),
        'max_steps': max(o['steps'] for o in orbits),
        'max_length': max(o['length'] for o in orbits),
        'all_at_center': all(o['at_center'] for o in orbits),
        'failed': failed[:10],
        'holds': not failed
    }


"""
One-sided lemma
"""


def choose_alpha(slope_center, values_min, value_start, nu, delta_prime, steps):
    """
    Largest alpha in (0, 1) found by bisection with
    alpha * slope(center) < min(1, nu/delta'), alpha * min F > -nu and alpha * F(x0) < nu.
    """
    def admissible(alpha):
        return (alpha * slope_center < min(1.0, nu / delta_prime)
                and alpha * values_min > -nu
                and alpha * value_start < nu)

    low, high = 0.0, 1.0
    for _ in range(steps):
        middle = (low + high) / 2
        if admissible(middle):
            low = middle
        else:
            high = middle

    if low <= 0 or not admissible(low):
        raise HypothesisScaleMismatch(f"No alpha in (0, 1) satisfies the scaling conditions (nu={nu:.6g}).")
    return low


def run_one_sided(f, g, center, c, delta, x0, h=None, threads=1):
    """
    Numerical run of the one-sided lemma: with df in dg near `center`,
    f(x0) - g(x0) >= f(center) - g(center) for x0 in the open delta'-ball.
    Builds f1 = alpha F + h, g1 = alpha G + h with F = f - f(center),
    G = g - g(center) and h = 4 ||. - center|| - <p, . - center>, restricts to
    the sublevel set Y of f1 at x0 on a grid and runs the orbit core on Y.
    """
    settings = app.config['DETERMINATION']
    center = as_point(center, f.dim)
    x0 = as_point(x0, f.dim)

    delta_prime = float(min(exact(delta), 1 / (9 * exact(c))))
    c_prime = 6 * c
    offset = float(np.linalg.norm(x0 - center))
    if offset >= delta_prime:
        raise InputError(f"x0 must lie in the open ball of radius delta' = {delta_prime:.12g} around the center.")

    h = delta_prime / settings['grid-points'] if h is None else h
    h = min(h, delta_prime)
    nu = (delta_prime - offset) / 2

    F = f.shifted(-f(center))
    G = g.shifted(-g(center))
    grid = EuclideanGrid(f.dim, center, delta_prime, h, open_ball=True)
    space, start = grid.with_point(x0)

    F_values = F.evaluate(space.coords)
    slope_center = float(np.linalg.norm(min_norm_element(F.subdifferential(center))))
    alpha = choose_alpha(slope_center, float(F_values.min()), F(x0), nu, delta_prime, settings['bisection-steps'])
    p = alpha * min_norm_element(F.subdifferential(center))

    tilt = perturbation(center, p, f.dim)
    f1 = Sum([(alpha, F), (1.0, tilt)], id=f"f1({f.id})")
    g1 = Sum([(alpha, G), (1.0, tilt)], id=f"g1({g.id})")

    f1_field = ScalarField.sample(space, f1)
    Y, f1_Y, indices = sublevel_restrict(space, f1_field, start)
    g1_Y = ScalarField.sample(Y, g1)
    center_Y = Y.locate(center, 1e-12)

    core = slope_determination_core(Y, f1_Y, g1_Y, analytic_slopes(Y, f1), analytic_slopes(Y, g1),
                                    c_prime, center_Y, threads=threads)

    eps = app.config['SLOPE']['eps-per-h'] * h
    lipschitz = f.lipschitz_on(center, float(delta))
    tolerance = settings['tolerance-factor'] * (eps + h) * (1 + lipschitz)
    margin = (f(x0) - g(x0)) - (f(center) - g(center))

    report = {
        'f': f.id,
        'g': g.id,
        'center': center,
        'x0': x0,
        'c_prime': exact(c_prime),
        'delta_prime': min(exact(delta), 1 / (9 * exact(c))),
        'nu': nu,
        'alpha': alpha,
        'p': p,
        'h': h,
        'grid_points': space.size,
        'Y_points': Y.size,
        'core': core,
        'margin': margin,
        'tolerance': tolerance,
        'holds': bool(core['holds'] and margin >= -tolerance)
    }
    log.debug("One-sided run %s vs %s at %s: margin %.3g, holds=%s",
              f.id, g.id, format_point(center), margin, report['holds'])
    return report


"""
Determination
"""


@dataclass
class DeterminationReport:
    instance: DeterminationInstance
    status: str
    gate: dict
    delta_hat: object = None
    delta_prime: object = None
    c_prime: object = None
    a: Optional[float] = None
    max_deviation: Optional[float] = None
    tolerance: Optional[float] = None
    h: Optional[float] = None
    certificates: dict = dataclass_field(default_factory=dict)
    one_sided: list = dataclass_field(default_factory=list)
    two_sided_consistency: Optional[float] = None
    graphical_density: Optional[dict] = None
    expected_a_holds: Optional[bool] = None
    rows: list = dataclass_field(default_factory=list)
    plot: list = dataclass_field(default_factory=list)

    @property
    def passed(self):
        return self.status == 'pass'

    @property
    def refused(self):
        return self.status == 'refused'

    def json(self):
        data = {
            'instance': self.instance,
            'status': self.status,
            'subdifferential_equality_verified': self.gate['equal'],
            'gate': self.gate
        }
        if self.refused:
            return data
        return dict(data, **{
            'delta_hat': self.delta_hat,
            'delta_prime': self.delta_prime,
            'c_prime': self.c_prime,
            'a': self.a,
            'max_deviation': self.max_deviation,
            'tolerance': self.tolerance,
            'h': self.h,
            'certificates': self.certificates,
            'one_sided': self.one_sided,
            'two_sided_consistency': self.two_sided_consistency,
            'graphical_density': self.graphical_density,
            'expected_a_holds': self.expected_a_holds
        })


CSV_HEADER = ('point', 'f', 'g', 'f-g-a', 'slope_f', 'slope_g')


def determination_centers(center, delta_hat):
    """
    x_bar and x_bar +- (delta_hat / 2) e_i.
    """
    dim = center.shape[0]
    shifts = np.vstack([np.eye(dim), -np.eye(dim)]) * (delta_hat / 2)
    return np.vstack([center, center + shifts])


def run_determination(instance, sampling=None, h=None):
    """
    Gate on df = dg, certify both functions, run the one-sided lemma both ways
    at sampled centers of the delta_hat-ball and measure |f - g - a| there.
    """
    sampling = Sampling.from_config() if sampling is None else sampling
    settings = app.config['DETERMINATION']

    gate = verify_subdifferential_equality(instance, sampling)
    if not gate['equal']:
        log.warning("Instance '%s' refused: subdifferentials differ at %s", instance.name, gate['witness']['point'])
        return DeterminationReport(instance=instance, status='refused', gate=gate)

    f, g, center, c, delta = instance.f, instance.g, instance.center, instance.c, instance.delta
    certificates = {
        'f': certify_plr(f, center, c, delta, sampling),
        'g': certify_plr(g, center, c, delta, sampling)
    }
    for name, certificate in certificates.items():
        if not certificate.passed:
            raise PreconditionError(f"{name} = '{certificate.function.id}' is not PLR at c={c:g}, delta={delta:g}.",
                                    witness=certificate.worst)

    delta_hat = instance.delta_hat
    delta_prime = min(exact(delta), 1 / (9 * exact(c)))
    radius = float(delta_hat)
    h = radius / settings['grid-points'] if h is None else h
    if not 0 < h <= radius:
        raise InputError(f"Grid spacing h must lie in (0, delta_hat = {radius:.12g}].")

    one_sided = []
    for x in determination_centers(center, radius):
        forward = run_one_sided(f, g, x, c, delta / 2, center, h, sampling.threads)
        backward = run_one_sided(g, f, x, c, delta / 2, center, h, sampling.threads)
        one_sided.append({'center': x, 'f_vs_g': forward, 'g_vs_f': backward,
                          'margin_sum': forward['margin'] + backward['margin']})

    a = f(center) - g(center)
    sample = EuclideanGrid(f.dim, center, radius, h, open_ball=True)
    f_values, g_values = f.evaluate(sample.coords), g.evaluate(sample.coords)
    deviation = np.abs(f_values - g_values - a)
    slopes_f, slopes_g = analytic_slopes(sample, f), analytic_slopes(sample, g)

    eps = app.config['SLOPE']['eps-per-h'] * h
    tolerance = settings['tolerance-factor'] * (eps + h) * (1 + f.lipschitz_on(center, delta))
    max_deviation = float(deviation.max())

    finite_slope = slopes_f.finite
    difference = f_values - g_values
    density = {
        'min_all': float(difference.min()),
        'min_finite_slope': float(difference[finite_slope].min()) if finite_slope.any() else None,
    }
    density['holds'] = density['min_finite_slope'] is not None and \
        abs(density['min_all'] - density['min_finite_slope']) <= tolerance

    consistency = max(abs(run['margin_sum']) for run in one_sided)
    expected_a = instance.expected.get('a')
    expected_a_holds = None if expected_a is None else bool(abs(a - expected_a) <= tolerance)

    passed = (all(run['f_vs_g']['holds'] and run['g_vs_f']['holds'] for run in one_sided)
              and max_deviation <= tolerance
              and consistency <= 2 * tolerance
              and density['holds']
              and expected_a_holds is not False)

    rows = [
        (sample.labels[i], f_values[i], g_values[i], f_values[i] - g_values[i] - a,
         slopes_f.value(i), slopes_g.value(i))
        for i in range(sample.size)
    ]

    report = DeterminationReport(
        instance=instance,
        status='pass' if passed else 'fail',
        gate=gate,
        delta_hat=delta_hat,
        delta_prime=delta_prime,
        c_prime=6 * exact(c),
        a=a,
        max_deviation=max_deviation,
        tolerance=tolerance,
        h=h,
        certificates=certificates,
        one_sided=one_sided,
        two_sided_consistency=consistency,
        graphical_density=density,
        expected_a_holds=expected_a_holds,
        rows=rows,
        plot=deviation_profile(sample, center, deviation)
    )
    log.info("Determination '%s': a=%.12g, max deviation %.3g <= %.3g: %s",
             instance.name, a, max_deviation, tolerance, report.status)
    return report


def deviation_profile(sample, center, deviation):
    """
    (r, max deviation within radius r) for every distinct sample radius.
    """
    radii = np.round(np.linalg.norm(sample.coords - center, axis=1), 12)
    order = np.argsort(radii, kind='stable')
    running = np.maximum.accumulate(deviation[order])
    distinct = np.r_[radii[order][1:] != radii[order][:-1], True]
    return list(zip(radii[order][distinct].tolist(), running[distinct].tolist()))


def refinement_study(instance, h0=0.04, halvings=3, sampling=None):
    """
    Runs the determination for h0, h0/2, ... and checks that the maximum
    deviation does not grow (deviations below the floor count as equal).
    `floor_reached` tells whether every step sits at the floor, where the
    monotone verdict carries no information.
    """
    floor = app.config['DETERMINATION']['refinement-floor']
    steps = []
    h = h0
    for _ in range(halvings + 1):
        report = run_determination(instance, sampling, h)
        if report.refused:
            raise PreconditionError(f"Instance '{instance.name}' is refused at the subdifferential gate.",
                                    witness=report.gate['witness']['point'])
        orbits = [run for pair in report.one_sided for side in ('f_vs_g', 'g_vs_f')
                  for run in pair[side]['core'].get('dilations', [])]
        steps.append({
            'h': h,
            'tolerance': report.tolerance,
            'max_deviation': report.max_deviation,
            'orbits': sum(run.get('orbits', 0) for run in orbits),
            'all_at_center': all(run.get('all_at_center', False) for run in orbits),
            'status': report.status,
            'floor_reached': report.max_deviation <= floor
        })
        h /= 2

    deviations = [max(step['max_deviation'], floor) for step in steps]
    monotone = all(b <= a for a, b in zip(deviations, deviations[1:]))

    return {
        'instance': instance.name,
        'steps': steps,
        'monotone': monotone,
        'floor_reached': all(step['floor_reached'] for step in steps),
        'plot': [(step['h'], step['max_deviation']) for step in steps],
        'holds': monotone and all(step['status'] == 'pass' for step in steps)
    }


"""
Responses
"""


class DetermineParamsSchema(StrictSchema):
    instance = fields.Raw(required=True)
    h = fields.Float(allow_none=True, load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    refine = fields.Bool(load_default=False)
    h0 = fields.Float(load_default=0.04, validate=validate.Range(min=0, min_inclusive=False))
    halvings = fields.Int(load_default=3, validate=validate.Range(min=0, max=6))


def determine_response(instance, h=None, refine=False, h0=0.04, halvings=3, seed=None, threads=None,
                       csv=None, plot=None):
    """
    Determination run on one instance. A negative control refused at the
    subdifferential gate counts as a pass; with `refine` the run is repeated
    for h0, h0/2, ... and the plot data follows the refinement curve.
    """
    instance = DeterminationInstance.from_dict(instance) if isinstance(instance, dict) else load_instance(instance)
    sampling = Sampling.from_config(seed, threads)
    expected_equal = instance.expected['equal_up_to_constant']

    if refine:
        study = refinement_study(instance, h0, halvings, sampling)
        if plot:
            write_plot_data(plot, study['plot'])
        return report_response(study, study['holds'])

    report = run_determination(instance, sampling, h)

    if not report.refused:
        if csv:
            write_csv(csv, CSV_HEADER, report.rows)
        if plot:
            write_plot_data(plot, report.plot)

    if report.refused:
        message = f"Refused at the subdifferential gate at {report.gate['witness']['point']}."
    else:
        message = f"a = {report.a:.12g}, max deviation {report.max_deviation:.3g}."

    return report_response(report, report.passed and expected_equal, message=message,
                           expected_failure=report.refused and not expected_equal)
