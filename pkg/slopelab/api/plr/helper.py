import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np
from marshmallow import fields, validate

from slopelab import app
from slopelab.api.catalog.helper import resolve_function
from slopelab.api.helper import StrictSchema, load_json, parse, report_response
from slopelab.api.ekeland.helper import slope_perturbed_min
from slopelab.api.slope.helper import analytic_slopes
from slopelab.api.subdifferential.helper import min_norm_element, slope_from_subdifferential, sum_oracle
from slopelab.api.validators import (
    validate_positive,
    validate_open_unit_interval,
    validate_sequence,
    raise_on_errors,
)
from slopelab.exceptions import InputError, PreconditionError, CoverageError
from slopelab.functions import Sum, ScaledNorm, linear
from slopelab.helper import make_rng, parallel_map, chunks, exact
from slopelab.models import EuclideanGrid, ScalarField, SubdifferentialOracle, as_point, format_point, PLUS_INF

log = logging.getLogger(__name__)


"""
Sampling
"""


@dataclass
class Sampling:
    points_per_radius: int
    pair_limit: int
    random_pairs: int
    boundary_points: int
    seed: int = 0
    threads: int = 1

    @staticmethod
    def from_config(seed=None, threads=None):
        sampling = app.config['SAMPLING']
        return Sampling(
            points_per_radius=sampling['points-per-radius'],
            pair_limit=sampling['pair-limit'],
            random_pairs=sampling['random-pairs'],
            boundary_points=sampling['boundary-points'],
            seed=app.config['SEED'] if seed is None else seed,
            threads=app.config['THREADS'] if threads is None else threads
        )

    def ball(self, dim, center, radius, open_ball=True):
        return EuclideanGrid(dim, center, radius, radius / self.points_per_radius, open_ball=open_ball)

    def partners(self, size):
        """
        None when every pair is checked, else a (size x random_pairs) index
        table drawn once so the result does not depend on the thread count.
        """
        if size <= self.pair_limit:
            return None
        return make_rng(self.seed).integers(0, size, size=(size, self.random_pairs))

    def point_rng(self, i):
        return make_rng([self.seed, int(i)])

    def json(self):
        return {
            'points_per_radius': self.points_per_radius,
            'pair_limit': self.pair_limit,
            'random_pairs': self.random_pairs,
            'boundary_points': self.boundary_points,
            'seed': self.seed
        }


def field_tolerance(values):
    return app.config['TOLERANCE']['finite'] * (1 + float(np.nanmax(np.abs(values))))


def merge_violations(parts):
    """
    Flattens per-chunk results in index order and picks the worst margin
    (lowest index among ties).
    """
    violations = [v for part in parts for v in part['violations']]
    checked = sum(part['checked'] for part in parts)
    count = sum(part['count'] for part in parts)
    worst = min(violations, key=lambda v: v['margin']) if violations else None
    return violations, checked, count, worst


"""
Certificates
"""


@dataclass
class PlrCertificate:
    center: np.ndarray
    c: float
    delta: float
    status: str
    violations: list
    function: object = None
    oracle: Optional[SubdifferentialOracle] = None
    sampling: Optional[Sampling] = None
    checked: int = 0
    violation_count: int = 0
    points: int = 0
    tolerance: float = 0.0
    worst: Optional[dict] = None
    notes: list = dataclass_field(default_factory=list)

    @property
    def passed(self):
        return self.status == 'pass'

    def json(self):
        shown = sorted(self.violations, key=lambda v: v['margin'])[:10]
        return {
            'function': self.function.id if self.function is not None else None,
            'center': self.center,
            'c': self.c,
            'delta': self.delta,
            'status': self.status,
            'points': self.points,
            'checked_pairs': self.checked,
            'violation_count': self.violation_count,
            'tolerance': self.tolerance,
            'worst': self.worst,
            'violations': shown,
            'sampling': self.sampling,
            'notes': self.notes
        }


@dataclass
class RegularSlopeCertificate:
    c: float
    status: str
    violations: list
    checked: int = 0
    violation_count: int = 0
    skipped: int = 0
    tolerance: float = 0.0
    worst: Optional[dict] = None

    @property
    def passed(self):
        return self.status == 'pass'

    def json(self):
        return {
            'c': self.c,
            'status': self.status,
            'checked_pairs': self.checked,
            'violation_count': self.violation_count,
            'skipped_infinite_slope': self.skipped,
            'tolerance': self.tolerance,
            'worst': self.worst,
            'violations': sorted(self.violations, key=lambda v: v['margin'])[:10]
        }


def subgradient_test_set(S, sampling, i):
    """
    Vertices, the min-norm point and seeded boundary points of S.
    """
    extra = S.sample_points(sampling.boundary_points, sampling.point_rng(i))
    return np.vstack([S.vertices, min_norm_element(S)[np.newaxis, :], extra])


def certify_plr(function, center, c, delta, sampling=None, oracle=None):
    """
    Checks f(y) >= f(x) + <p, y - x> - c (1 + ||p||) ||y - x||^2 for sampled
    x, y in the open ball B(center; delta) and every tested p in df(x).
    """
    errors = {}
    validate_positive(c, 'c', errors)
    validate_positive(delta, 'delta', errors)
    raise_on_errors(errors)

    sampling = Sampling.from_config() if sampling is None else sampling
    oracle = SubdifferentialOracle.of(function) if oracle is None else oracle
    center = as_point(center, function.dim)

    grid = sampling.ball(function.dim, center, delta)
    coords = grid.coords
    values = function.evaluate(coords)
    tolerance = field_tolerance(values)
    partners = sampling.partners(grid.size)

    log.debug("PLR check of '%s' at %s with c=%g, delta=%g on %d points",
              function.id, format_point(center), c, delta, grid.size)

    def check(block):
        violations, checked, count = [], 0, 0
        for i in block:
            S = oracle(coords[i])
            if S is None:
                raise CoverageError(f"Subdifferential of '{function.id}' is empty at {grid.labels[i]} "
                                    f"inside the certified ball.", witness=grid.labels[i])

            P = subgradient_test_set(S, sampling, i)
            others = np.arange(grid.size) if partners is None else partners[i]
            others = others[others != i]

            dY = coords[others] - coords[i]
            squared = np.einsum('ij,ij->i', dY, dY)
            weights = c * (1 + np.linalg.norm(P, axis=1))
            margins = (values[others] - values[i])[:, np.newaxis] - dY @ P.T + squared[:, np.newaxis] * weights

            checked += margins.size
            bad = margins < -tolerance
            if bad.any():
                count += int(bad.sum())
                j, k = np.unravel_index(np.argmin(margins), margins.shape)
                violations.append({
                    'x': grid.labels[i],
                    'y': grid.labels[others[j]],
                    'p': P[k],
                    'margin': float(margins[j, k])
                })
        return {'violations': violations, 'checked': checked, 'count': count}

    parts = parallel_map(check, chunks(grid.size, sampling.threads), sampling.threads)
    violations, checked, count, worst = merge_violations(parts)

    certificate = PlrCertificate(
        center=center,
        c=c,
        delta=delta,
        status='fail' if violations else 'pass',
        violations=violations,
        function=function,
        oracle=oracle,
        sampling=sampling,
        checked=checked,
        violation_count=count,
        points=grid.size,
        tolerance=tolerance,
        worst=worst
    )
    log.info("PLR check of '%s' at c=%g, delta=%g: %s", function.id, c, delta, certificate.status)
    return certificate


def certify_regular_slope(f, slopes, c, sampling=None):
    """
    Checks f(y) >= f(x) - s(x) d - c (1 + s(x)) d^2 over pairs of the space,
    where s is the slope field. Points with s(x) = +inf are skipped.
    """
    errors = {}
    validate_positive(c, 'c', errors)
    raise_on_errors(errors)

    if slopes.space is not f.space:
        raise InputError("Field and slope field must live on the same space.")

    sampling = Sampling.from_config() if sampling is None else sampling
    space = f.space
    tolerance = field_tolerance(f.values[f.finite])
    partners = sampling.partners(space.size)
    active = np.flatnonzero(f.finite & slopes.finite)
    skipped = int((f.finite & ~slopes.finite).sum())

    def check(block):
        violations, checked, count = [], 0, 0
        for i in active[block]:
            others = np.arange(space.size) if partners is None else partners[i]
            others = others[(others != i) & f.finite[others]]
            d = space.distances_from(i)[others]
            s = slopes.values[i]
            margins = f.values[others] - f.values[i] + s * d + c * (1 + s) * d ** 2

            checked += margins.size
            bad = margins < -tolerance
            if bad.any():
                count += int(bad.sum())
                j = int(np.argmin(margins))
                violations.append({'x': space.labels[i], 'y': space.labels[others[j]], 'margin': float(margins[j])})
        return {'violations': violations, 'checked': checked, 'count': count}

    parts = parallel_map(check, chunks(active.size, sampling.threads), sampling.threads) if active.size else []
    violations, checked, count, worst = merge_violations(parts)

    certificate = RegularSlopeCertificate(
        c=c,
        status='fail' if violations else 'pass',
        violations=violations,
        checked=checked,
        violation_count=count,
        skipped=skipped,
        tolerance=tolerance,
        worst=worst
    )
    log.info("Regular slope check at c=%g: %s", c, certificate.status)
    return certificate


def certify_regular_slope_analytic(function, center, c, radius, sampling=None):
    """
    certify_regular_slope on a grid of the closed ball B(center; radius) with
    analytic min-norm slopes.
    """
    sampling = Sampling.from_config() if sampling is None else sampling
    grid = sampling.ball(function.dim, center, radius, open_ball=False)
    return certify_regular_slope(ScalarField.sample(grid, function), analytic_slopes(grid, function), c, sampling)


"""
Transforms
"""


def scale_plr(certificate, alpha):
    """
    Re-certifies alpha * f with the same (c, delta). A failing input
    certificate makes the result fail too.
    """
    errors = {}
    validate_open_unit_interval(alpha, 'alpha', errors)
    raise_on_errors(errors)

    function = certificate.function
    scaled = Sum([(alpha, function)], id=f"{alpha:g}*{function.id}")
    oracle = SubdifferentialOracle(lambda x: _scale(certificate.oracle(x), alpha), scaled.id, function.dim)

    result = certify_plr(scaled, certificate.center, certificate.c, certificate.delta, certificate.sampling, oracle)
    return propagate(certificate, result, f"scaled by {alpha:g}")


def _scale(S, alpha):
    return None if S is None else S.scale(alpha)


def add_convex_plr(certificate, h):
    """
    Certifies f + h at coefficient c (L + 1), L = lip h on the ball.
    """
    if not h.convex:
        raise InputError(f"Catalog entry '{h.id}' is not convex.", witness=h.id)
    if h.dim != certificate.function.dim:
        raise InputError(f"Cannot add '{h.id}' of dimension {h.dim} to a function of dimension "
                         f"{certificate.function.dim}.")

    L = h.lipschitz_on(certificate.center, certificate.delta)
    total = Sum([(1.0, certificate.function), (1.0, h)], id=f"{certificate.function.id}+{h.id}")
    oracle = sum_oracle(certificate.oracle, SubdifferentialOracle.of(h))

    result = certify_plr(total, certificate.center, certificate.c * (L + 1), certificate.delta,
                         certificate.sampling, oracle)
    result.notes.append(f"lip h on the ball = {L:.12g}")
    return propagate(certificate, result, f"plus convex '{h.id}'")


def propagate(source, result, operation):
    result.notes.append(f"{operation}; source certificate {source.status}")
    if not source.passed:
        result.status = 'fail'
    return result


def perturbation(center, p, dim, weight=4):
    """
    h(x) = weight ||x - center|| - <p, x - center>, convex with lip h <= weight + ||p||.
    """
    center = as_point(center, dim)
    p = as_point(p, dim)
    tilt = linear(-p, float(p @ center), id='tilt')
    return Sum([(1.0, ScaledNorm(dim, weight, center)), (1.0, tilt)], id='sharp-min-perturbation')


def sharp_min_constants(c, delta):
    c, delta = exact(c), exact(delta)
    return 6 * c, min(delta, 1 / (9 * c))


def sharp_min_transform(function, center, c, delta, p=None, sampling=None, oracle=None):
    """
    f1 = f - <p, x - center> + 4 ||x - center|| with c' = 6c and
    delta' = min(delta, 1/(9c)). The report checks that f1 has a minimum at the
    center over the open delta'-ball and slope f1 >= 1 off the center, and
    re-certifies f1 at (c', delta').
    """
    sampling = Sampling.from_config() if sampling is None else sampling
    oracle = SubdifferentialOracle.of(function) if oracle is None else oracle
    center = as_point(center, function.dim)

    S = oracle(center)
    if S is None:
        raise PreconditionError(f"Subdifferential of '{function.id}' is empty at the center.",
                                witness=format_point(center))
    p = min_norm_element(S) if p is None else as_point(p, function.dim)
    if np.linalg.norm(p) >= 1:
        raise PreconditionError(f"Sharp-minimum transform needs ||p|| < 1, got {np.linalg.norm(p):.12g}.",
                                witness=format_point(p))

    certificate = certify_plr(function, center, c, delta, sampling, oracle)
    if not certificate.passed:
        raise PreconditionError(f"'{function.id}' is not PLR at c={c:g}, delta={delta:g}.",
                                witness=certificate.worst)

    c_prime, delta_prime = sharp_min_constants(c, delta)
    h = perturbation(center, p, function.dim)
    f1 = Sum([(1.0, function), (1.0, h)], id=f"sharp({function.id})")
    f1_oracle = sum_oracle(oracle, SubdifferentialOracle.of(h))

    grid = sampling.ball(function.dim, center, float(delta_prime))
    values = f1.evaluate(grid.coords)
    centre_value = f1(center)
    tolerance = field_tolerance(values)
    minimum_ok = centre_value <= values.min() + tolerance

    off_center = [i for i in range(grid.size) if i != grid.center_index]
    slopes = [slope_from_subdifferential(f1_oracle, grid.coords[i]) for i in off_center]
    finite = [s for s in slopes if s is not PLUS_INF]
    min_slope = min(finite) if finite else PLUS_INF
    slope_ok = all(s >= 1 - app.config['TOLERANCE']['sharp-slope'] for s in finite)

    transformed = certify_plr(f1, center, float(c_prime), float(delta_prime), sampling, f1_oracle)

    report = {
        'function': function.id,
        'center': center,
        'p': p,
        'c': exact(c),
        'delta': exact(delta),
        'c_prime': c_prime,
        'delta_prime': delta_prime,
        'f1_center': centre_value,
        'f1_sample_min': float(values.min()),
        'minimum_holds': bool(minimum_ok),
        'min_slope_off_center': min_slope,
        'slope_holds': bool(slope_ok),
        'points': grid.size,
        'plr_transformed': transformed,
        'holds': bool(minimum_ok and slope_ok and transformed.passed)
    }
    log.info("Sharp-minimum transform of '%s': c'=%s, delta'=%s, holds=%s",
             function.id, c_prime, delta_prime, report['holds'])
    return f1, c_prime, delta_prime, report


"""
Series lemma
"""


def verify_series_bound(a, b, c, s=None):
    """
    Checks b[k+1] - b[k] < 2c (2 + b[k]) a[k] index by index; when every index
    passes, asserts b[n] < B = (b + 2c(2+b) s) e^(6cs) with b = max(b[0], 1)
    and s = sum(a) (or a supplied bound on the full series).
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]

    errors = {}
    validate_positive(c, 'c', errors)
    validate_sequence(a, 'a', errors)
    validate_sequence(b, 'b', errors, strictly_positive=True)
    if not b:
        errors['b'] = "'b' must be nonempty."
    if len(b) > len(a) + 1:
        errors['b'] = f"'b' may have at most len(a) + 1 = {len(a) + 1} terms."
    prefix = math.fsum(a)
    if s is not None and not (isinstance(s, (int, float)) and s >= prefix):
        errors['s'] = f"'s' must bound the partial sum {prefix!r}."
    raise_on_errors(errors)

    s = prefix if s is None else float(s)
    report = {'c': c, 's': s, 'terms': len(b)}

    for k in range(len(b) - 1):
        lhs = b[k + 1] - b[k]
        rhs = 2 * c * (2 + b[k]) * a[k]
        if not lhs < rhs:
            log.warning("Series hypothesis fails at index %d: %.12g >= %.12g", k, lhs, rhs)
            report.update({
                'hypothesis_holds': False,
                'violation_index': k,
                'violation': {'increment': lhs, 'allowed': rhs},
                'holds': False
            })
            return report

    base = max(b[0], 1.0)
    bound = (base + 2 * c * (2 + base) * s) * math.exp(6 * c * s)
    above = [n for n, v in enumerate(b) if not (v < bound or v <= base)]

    report.update({
        'hypothesis_holds': True,
        'b': base,
        'bound': bound,
        'max_term': max(b),
        'first_above_bound': above[0] if above else None,
        'holds': not above
    })
    return report


"""
Representation sequences
"""


def representation_sequence(function, center, c, n_max, n_min=1, oracle=None, grid_points=None, sampling=None):
    """
    For each n > 1/r (r = slope at the center) builds
    g_n = r_n d(., center) + c (r + 2) d(., center)^2 with r_n = r - 1/n, takes
    x_n = slope_perturbed_min(f - f(center), g_n, eps_n) on a grid of radius
    2/(cn) around the center and reports the difference quotient, the distance
    bound and the slope gap at x_n. f must be regularly sloped at c; this is
    certified first on the ball of radius 2/(c n_min), which holds every grid.
    """
    errors = {}
    validate_positive(c, 'c', errors)
    if not (isinstance(n_max, int) and isinstance(n_min, int) and 1 <= n_min <= n_max):
        errors['n'] = "Need integers 1 <= n_min <= n_max."
    raise_on_errors(errors)

    oracle = SubdifferentialOracle.of(function) if oracle is None else oracle
    grid_points = app.config['REPRESENTATION']['grid-points'] if grid_points is None else grid_points
    center = as_point(center, function.dim)

    r = slope_from_subdifferential(oracle, center)
    if r is PLUS_INF or r <= 0:
        raise PreconditionError(f"Representation sequences need 0 < slope < +inf at the center, got {r}.",
                                witness=format_point(center))

    certificate = certify_regular_slope_analytic(function, center, c, 2 / (c * n_min), sampling)
    if not certificate.passed:
        raise PreconditionError(f"'{function.id}' is not regularly sloped at c={c:g} near {format_point(center)}.",
                                witness=certificate.worst)

    f0 = function(center)
    rows = []
    for n in range(n_min, n_max + 1):
        if n <= 1 / r:
            rows.append({'n': n, 'status': 'out-of-range'})
            continue
        rows.append(representation_step(function, oracle, center, f0, r, c, n, grid_points))

    in_range = [row for row in rows if row['status'] != 'out-of-range']
    report = {
        'function': function.id,
        'center': center,
        'c': c,
        'slope': r,
        'regular_slope': certificate,
        'rows': rows,
        'holds': all(row['status'] == 'pass' for row in in_range)
    }
    log.info("Representation sequence of '%s': %d indices, holds=%s", function.id, len(in_range), report['holds'])
    return report


def representation_step(function, oracle, center, f0, r, c, n, grid_points):
    radius = 2 / (c * n)
    grid = EuclideanGrid(function.dim, center, radius, radius / grid_points)
    d = grid.distances_from(grid.center_index)
    r_n = r - 1 / n

    f = ScalarField(grid, function.evaluate(grid.coords) - f0, name=function.id)
    g = ScalarField(grid, r_n * d + c * (r + 2) * d ** 2, name='g_n')
    infimum = float(np.min(f.values + g.values))

    row = {'n': n, 'r_n': r_n, 'grid_points': grid.size, 'infimum': infimum}
    if infimum >= 0:
        row.update({'status': 'fail', 'reason': 'inf(f + g_n) is not negative on the grid'})
        return row

    eps = min(1 / (2 * n), abs(infimum) / 2)
    x, ekeland = slope_perturbed_min(grid, f, g, eps)
    distance = float(d[x])

    if distance == 0:
        row.update({'status': 'fail', 'eps': eps, 'reason': 'x_n coincides with the center'})
        return row

    quotient = -f.values[x] / distance
    slope = slope_from_subdifferential(oracle, grid.coords[x])
    gap_bound = 2 * c * (r + 2) * distance
    quotient_ok = quotient > r_n
    distance_ok = distance < 1 / (c * n)
    gap_ok = slope is not PLUS_INF and slope - r < gap_bound

    row.update({
        'eps': eps,
        'x_n': grid.labels[x],
        'distance': distance,
        'quotient': quotient,
        'slope': slope,
        'slope_gap': slope - r if slope is not PLUS_INF else PLUS_INF,
        'slope_gap_bound': gap_bound,
        'quotient_holds': bool(quotient_ok),
        'distance_holds': bool(distance_ok),
        'slope_gap_holds': bool(gap_ok),
        'perturbed_min_holds': ekeland['holds'],
        'status': 'pass' if quotient_ok and distance_ok and gap_ok else 'fail'
    })
    return row


"""
Slope regularity checks
"""


def check_slope_lsc(slopes, chain, limit, tail=None):
    """
    slope(limit) <= liminf of the slopes along `chain` (indices converging to
    `limit`); the liminf is the min over the last `tail` entries.
    """
    if not chain:
        raise InputError("A chain needs at least one point.")
    tail = max(1, len(chain) // 2) if tail is None else tail
    along = [slopes.value(i) for i in chain[-tail:]]
    finite = [v for v in along if v is not PLUS_INF]
    liminf = min(finite) if finite else PLUS_INF
    at_limit = slopes.value(limit)
    tolerance = app.config['TOLERANCE']['finite']

    holds = liminf is PLUS_INF or (at_limit is not PLUS_INF and at_limit <= liminf + tolerance)
    return {'limit': slopes.space.labels[limit], 'slope_at_limit': at_limit, 'liminf': liminf, 'holds': bool(holds)}


def check_bounded_slope_continuity(f, slopes, chain, limit, c, bound=None):
    """
    For chain points with slope <= R: |f(x_n) - f(x)| <= R d + c (R + 1) d^2.
    The side f(x) - f(x_n) uses slope(x) <= R, which lower semicontinuity gives.
    """
    space = f.space
    bound = max(slopes.value(i) for i in chain) if bound is None else bound
    if bound is PLUS_INF:
        raise InputError("Chain slopes must be bounded.")

    fx = f.finite_value(limit)
    tolerance = field_tolerance(f.values[f.finite])
    rows, holds = [], True
    for i in chain:
        d = space.distance(i, limit)
        allowed = bound * d + c * (bound + 1) * d ** 2
        deviation = abs(f.finite_value(i) - fx)
        ok = deviation <= allowed + tolerance
        holds = holds and ok
        rows.append({'point': space.labels[i], 'distance': d, 'deviation': deviation, 'allowed': allowed, 'holds': ok})

    return {'limit': space.labels[limit], 'R': bound, 'c': c, 'rows': rows, 'holds': bool(holds)}


def check_sharp_minimum(f, slopes, center):
    """
    Reports min f, its argmin and inf over x != center of the slope. The
    minimum is sharp when the argmin is the center and the inf is positive.
    """
    values = np.where(f.finite, f.values, np.inf)
    argmin = int(np.argmin(values))
    others = [i for i in range(f.space.size) if i != center and slopes.finite[i]]
    infimum = float(min(slopes.values[i] for i in others)) if others else PLUS_INF
    tolerance = field_tolerance(f.values[f.finite])
    at_center = values[center] <= values.min() + tolerance

    return {
        'center': f.space.labels[center],
        'min': float(values.min()),
        'argmin': f.space.labels[argmin],
        'center_is_min': bool(at_center),
        'slope_infimum': infimum,
        'sharp': bool(at_center and (infimum is PLUS_INF or infimum > 0))
    }


def bisect_plr_coefficient(function, center, delta, low, high, steps=20, sampling=None):
    """
    Bisection on c for the smallest passing PLR coefficient on the sample.
    Heuristic: passing is not proven monotone in c on a finite sample.
    """
    errors = {}
    validate_positive(low, 'low', errors)
    validate_positive(high, 'high', errors)
    if not errors and low >= high:
        errors['high'] = "'high' must exceed 'low'."
    raise_on_errors(errors)

    sampling = Sampling.from_config() if sampling is None else sampling
    if not certify_plr(function, center, high, delta, sampling).passed:
        return {'heuristic': True, 'found': False, 'reason': f"c={high:g} does not pass"}

    for _ in range(steps):
        middle = (low + high) / 2
        if certify_plr(function, center, middle, delta, sampling).passed:
            high = middle
        else:
            low = middle

    return {'heuristic': True, 'found': True, 'c': high, 'bracket': [low, high], 'delta': delta}


"""
Responses
"""


def derived_constants(c, delta):
    """
    c' = 6c, delta' = min(delta, 1/(9c)) and delta_hat = min(delta/2, 1/(18c)), exact.
    """
    c_prime, delta_prime = sharp_min_constants(c, delta)
    return {
        'c_prime': c_prime,
        'delta_prime': delta_prime,
        'delta_hat': min(exact(delta) / 2, 1 / (18 * exact(c)))
    }


positive = validate.Range(min=0, min_inclusive=False)


class PlrCheckParamsSchema(StrictSchema):
    catalog = fields.Raw(required=True)
    center = fields.List(fields.Float(), required=True)
    c = fields.Float(required=True, validate=positive)
    delta = fields.Float(required=True, validate=positive)


class SharpMinParamsSchema(PlrCheckParamsSchema):
    p = fields.List(fields.Float(), allow_none=True, load_default=None)


class SeriesParamsSchema(StrictSchema):
    file = fields.Raw(required=True)
    c = fields.Float(required=True, validate=positive)


class SeriesFileSchema(StrictSchema):
    a = fields.List(fields.Float(allow_nan=False), required=True)
    b = fields.List(fields.Float(allow_nan=False), required=True)
    s = fields.Float(allow_none=True, load_default=None)
    description = fields.Str()


def plr_check_response(catalog, center, c, delta, seed=None, threads=None):
    function = resolve_function(catalog)
    certificate = certify_plr(function, center, c, delta, Sampling.from_config(seed, threads))
    report = dict(certificate.json(), constants=derived_constants(c, delta))
    return report_response(report, certificate.passed)


def sharp_min_response(catalog, center, c, delta, p=None, seed=None, threads=None):
    function = resolve_function(catalog)
    *_, report = sharp_min_transform(function, center, c, delta, p,
                                     Sampling.from_config(seed, threads))
    report = dict(report, constants=derived_constants(c, delta))
    return report_response(report, report['holds'])


def series_check_response(file, c, seed=None, threads=None):
    data = load_json(file) if isinstance(file, str) else file
    series = parse(SeriesFileSchema(), data, source='series file')
    report = verify_series_bound(series['a'], series['b'], c, series['s'])
    return report_response(report, report['holds'])
