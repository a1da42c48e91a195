import itertools
import logging

import numpy as np
from scipy.optimize import lsq_linear

from slopelab import app
from slopelab.exceptions import (
    InputError,
    EmptySubdifferentialError,
    NumericalError,
    UnsupportedProbeError,
)
from slopelab.helper import make_rng
from slopelab.models import SubdifferentialOracle, as_point, PLUS_INF

log = logging.getLogger(__name__)


"""
Min-norm element
"""


def min_norm_element(S):
    """
    Nearest point to the origin in S = conv(vertices) + radius * B.
    """
    if S is None:
        raise EmptySubdifferentialError("The set is empty; it has no min-norm element.")

    vertices = S.vertices
    limits = app.config['MIN_NORM']

    if len(vertices) == 1:
        q = vertices[0].copy()
    elif len(vertices) <= limits['exact-vertex-limit'] and S.dim <= limits['exact-dim-limit']:
        q = exact_min_norm(vertices)
    else:
        q = wolfe_min_norm(vertices, max_iter=limits['wolfe-max-iter'])

    return shrink(q, S.radius)


def shrink(q, radius):
    """
    Min-norm point of {q} + radius * B given the min-norm point q of the polytope part.
    """
    norm = np.linalg.norm(q)
    if norm <= radius:
        return np.zeros_like(q)
    return q * (1 - radius / norm)


def affine_minimizer(C):
    """
    Barycentric weights of the point of aff(C) nearest to the origin: the KKT
    system of min ||C'a||^2 subject to sum(a) = 1.
    """
    k = C.shape[0]
    M = np.block([
        [np.zeros((1, 1)), np.ones((1, k))],
        [np.ones((k, 1)), C @ C.T]
    ])
    b = np.concatenate([[1.0], np.zeros(k)])
    return lsq_linear(M, b).x[1:]


def exact_min_norm(vertices):
    """
    Active-set enumeration: the optimum is the affine projection of the origin
    onto some vertex subset with nonnegative weights. Every subset is tried.
    """
    tolerance = app.config['TOLERANCE']['min-norm']
    best = None

    for size in range(1, len(vertices) + 1):
        for subset in itertools.combinations(range(len(vertices)), size):
            C = vertices[list(subset)]
            weights = affine_minimizer(C) if size > 1 else np.ones(1)
            if weights.min() < -tolerance or abs(weights.sum() - 1) > tolerance:
                continue
            point = C.T @ weights
            if best is None or point @ point < best @ best:
                best = point

    if best is None:
        raise NumericalError("Active-set enumeration found no feasible face.")
    return best


def wolfe_min_norm(P, max_iter=1000):
    """
    Wolfe's min-norm-point iteration over the vertex rows of P.
    """
    tolerance = app.config['TOLERANCE']['min-norm']
    scale = max(1.0, float(np.max(np.einsum('ij,ij->i', P, P))))

    i = int(np.argmin(np.linalg.norm(P, axis=1)))
    corral = [i]
    weights = np.ones(1)
    x = P[i].copy()

    for _ in range(max_iter):
        j = int(np.argmin(P @ x))
        if x @ x - P[j] @ x <= tolerance * scale or j in corral:
            return x

        corral.append(j)
        weights = np.append(weights, 0.0)

        while True:
            alpha = affine_minimizer(P[corral])
            if alpha.min() > tolerance:
                weights = alpha
                break

            negative = (alpha <= tolerance) & (weights - alpha > 0)
            theta = np.min(weights[negative] / (weights[negative] - alpha[negative])) if negative.any() else 0.0
            weights = theta * alpha + (1 - theta) * weights

            drop = weights <= tolerance
            if not drop.any():
                drop[int(np.argmin(weights))] = True
            corral = [c for c, d in zip(corral, drop) if not d]
            weights = weights[~drop]
            weights = weights / weights.sum()

        x = P[corral].T @ weights

    raise NumericalError(f"Wolfe's iteration did not converge within {max_iter} major cycles.")


def set_distance(S, point):
    """
    Euclidean distance from `point` to S.
    """
    point = as_point(point, S.dim)
    return float(np.linalg.norm(min_norm_element(S.translate(-point))))


def set_contains(S, point, tolerance=None):
    tolerance = app.config['TOLERANCE']['min-norm'] if tolerance is None else tolerance
    return set_distance(S, point) <= tolerance * (1 + np.linalg.norm(point))


def projection_margin(S, p, points):
    """
    min over `points` of <p, v - p>; nonnegative (up to tolerance) iff p is the
    projection of the origin and `points` cover S.
    """
    points = np.atleast_2d(points)
    return float(np.min((points - p) @ p))


def check_min_norm(S, rng=None, count=None):
    """
    Variational check of the computed min-norm point on the vertices, the
    point itself and seeded boundary points of S.
    """
    rng = make_rng() if rng is None else rng
    count = app.config['SAMPLING']['boundary-points'] if count is None else count

    p = min_norm_element(S)
    points = np.vstack([S.vertices, S.sample_points(count, rng), p[np.newaxis, :]])
    margin = projection_margin(S, p, points)
    tolerance = app.config['TOLERANCE']['min-norm'] * (1 + float(np.max(np.abs(points))) ** 2)

    return {
        'point': p,
        'norm': float(np.linalg.norm(p)),
        'margin': margin,
        'checked': int(points.shape[0]),
        'holds': margin >= -tolerance
    }


"""
Slopes and oracles
"""


def slope_from_subdifferential(oracle, x):
    """
    Norm of the min-norm subgradient, +inf when the subdifferential is empty.
    """
    S = oracle(x)
    if S is None:
        return PLUS_INF
    return float(np.linalg.norm(min_norm_element(S)))


def sum_oracle(f_oracle, h_oracle):
    """
    x -> df(x) + dh(x), the pointwise Minkowski sum.
    """
    if f_oracle.dim != h_oracle.dim:
        raise InputError(f"Cannot add oracles of dimension {f_oracle.dim} and {h_oracle.dim}.")

    def rule(x):
        first, second = f_oracle(x), h_oracle(x)
        if first is None or second is None:
            return None
        return first + second

    return SubdifferentialOracle(rule, f"{f_oracle.provenance}+{h_oracle.provenance}", f_oracle.dim)


def direction_fan(dim, count=None, rng=None):
    """
    Unit directions: +-e_i first, then seeded random ones up to `count`.
    """
    count = app.config['SAMPLING']['directions'] if count is None else count
    rng = make_rng() if rng is None else rng

    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    extra = max(0, count - axes.shape[0])
    if not extra:
        return axes

    random = rng.standard_normal((extra, dim))
    random /= np.linalg.norm(random, axis=1, keepdims=True)
    return np.vstack([axes, random])


def support_gap(first, second, directions):
    """
    max |sigma_first(d) - sigma_second(d)| over the directions, None-aware:
    two empty sets agree, an empty and a nonempty set differ infinitely.
    """
    if first is None or second is None:
        return 0.0 if first is None and second is None else float('inf')
    return float(np.max(np.abs(first.support(directions) - second.support(directions))))


def subgradient_inequality_margin(function, count=1000, radius=1.0, rng=None):
    """
    min of f(y) - f(x) - <p, y - x> over seeded pairs (x, y) and the vertices
    p of df(x); nonnegative for convex entries.
    """
    if not function.convex:
        raise InputError(f"Subgradient inequality applies to convex entries; '{function.id}' is not convex.")

    rng = make_rng() if rng is None else rng
    xs = rng.uniform(-radius, radius, size=(count, function.dim))
    ys = rng.uniform(-radius, radius, size=(count, function.dim))
    fx, fy = function.evaluate(xs), function.evaluate(ys)

    worst = np.inf
    for x, y, vx, vy in zip(xs, ys, fx, fy):
        S = function.subdifferential(x)
        points = np.vstack([S.vertices, S.sample_points(2, rng)]) if S.radius > 0 else S.vertices
        worst = min(worst, float(np.min(vy - vx - points @ (y - x))))
    return worst


"""
Clarke directional derivative probe
"""


def clarke_slope_probe(function, x, directions=None, t_min=1e-6, t_max=1e-2, rng=None):
    """
    Estimates f°(x; h) = limsup (f(y + th) - f(y)) / t with y -> x, t -> 0 by
    sampling y on a ball of radius t around x along a ladder of t, and checks
    that the support function of the analytic oracle dominates the estimate.
    """
    if not function.lipschitz:
        raise UnsupportedProbeError(f"Catalog entry '{function.id}' is not locally Lipschitz.",
                                    witness=function.id)
    if not 0 < t_min < t_max:
        raise InputError("Probe step sizes need 0 < t_min < t_max.")

    rng = make_rng() if rng is None else rng
    x = as_point(x, function.dim)
    directions = direction_fan(function.dim, rng=rng) if directions is None else np.atleast_2d(directions)
    if directions.shape[1] != function.dim:
        raise InputError(f"Directions must have {function.dim} coordinates.")

    ladder = np.geomspace(t_max, t_min, num=int(np.ceil(np.log2(t_max / t_min))) + 1)
    offsets = rng.standard_normal((16, function.dim))
    offsets /= np.maximum(np.linalg.norm(offsets, axis=1, keepdims=True), 1e-300)

    S = function.subdifferential(x)
    reach = float(np.max(np.linalg.norm(directions, axis=1)))
    curvature = function.curvature_on(x, 2 * t_max * (1 + reach))
    slack = app.config['TOLERANCE']['support'] + curvature * ladder[-3] * (1 + reach) ** 2

    probes = []
    for h in directions:
        tail = []
        for t in ladder:
            ys = np.vstack([
                x,
                x - t * h,
                x - 0.5 * t * h,
                x + t * offsets * rng.uniform(0, 1, size=(offsets.shape[0], 1)),
            ])
            quotients = (function.evaluate(ys + t * h) - function.evaluate(ys)) / t
            tail.append(float(quotients.max()))
        estimate = max(tail[-3:])
        support = float(S.support(h))
        probes.append({
            'direction': h,
            'estimate': estimate,
            'support': support,
            'gap': support - estimate,
            'holds': support >= estimate - slack
        })

    log.debug("Clarke probe of '%s' at %s over %d directions", function.id, x.tolist(), len(probes))

    return {
        'function': function.id,
        'point': x,
        't_min': t_min,
        'slack': slack,
        'probes': probes,
        'holds': all(p['holds'] for p in probes)
    }
