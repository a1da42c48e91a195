import itertools

import numpy as np

from slopelab.exceptions import InputError
from slopelab.models import ConvexSet, Singleton, Ball, Polytope, as_point

ACTIVE_TOLERANCE = 1e-12


class AnalyticFunction:
    """
    Real-valued function on R^dim given by a closed-form expression, with an
    analytic subdifferential rule. Flags describe what the rule is valid for.
    """
    kind = None
    convex = False
    lipschitz = True
    f_regular = True
    smooth = False

    def __init__(self, dim, id=None):
        if not isinstance(dim, (int, np.integer)) or not 1 <= dim <= 4:
            raise InputError("Function dimension must be an integer from 1 to 4.")
        self.dim = int(dim)
        self.id = id

    def evaluate(self, points) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        return float(self.evaluate(as_point(x, self.dim)[np.newaxis, :])[0])

    def subdifferential(self, x) -> ConvexSet:
        raise NotImplementedError

    def lipschitz_on(self, center, radius):
        """
        Upper bound of the Lipschitz constant on the ball B(center; radius).
        """
        raise NotImplementedError

    def curvature_on(self, center, radius):
        """
        Upper bound of the gradient's Lipschitz constant over the smooth pieces.
        """
        return 0.0

    def flags(self):
        return {
            'convex': self.convex,
            'lipschitz': self.lipschitz,
            'f_regular': self.f_regular,
            'smooth': self.smooth
        }

    def json(self):
        return dict({'id': self.id, 'kind': self.kind, 'dim': self.dim}, **self.flags())

    def __add__(self, other):
        if isinstance(other, AnalyticFunction):
            return Sum([(1.0, self), (1.0, other)])
        return Sum([(1.0, self)], constant=float(other))

    __radd__ = __add__

    def __mul__(self, factor):
        return Sum([(float(factor), self)])

    __rmul__ = __mul__

    def shifted(self, constant, id=None):
        return Sum([(1.0, self)], constant=constant, id=id)

    def translated(self, offset, id=None):
        return Sum([(1.0, self)], offset=offset, id=id)

    def __repr__(self):
        return f"<{type(self).__name__}(id='{self.id}', dim={self.dim})>"


class Quadratic(AnalyticFunction):
    """
    q(x) = 1/2 x'Ax + <b, x> + c0. A scalar `A` stands for A * I.
    """
    kind = 'smooth'
    smooth = True

    def __init__(self, dim, A=0.0, b=None, c0=0.0, id=None):
        super().__init__(dim, id)
        A = np.asarray(A, dtype=float)
        A = A * np.eye(self.dim) if A.ndim == 0 else A
        if A.shape != (self.dim, self.dim):
            raise InputError(f"Quadratic term must be {self.dim}x{self.dim}.")

        self.A = (A + A.T) / 2
        self.b = np.zeros(self.dim) if b is None else as_point(b, self.dim)
        self.c0 = float(c0)
        self.convex = bool(np.linalg.eigvalsh(self.A).min() >= -1e-12)

    def evaluate(self, points):
        points = np.atleast_2d(points)
        return 0.5 * np.einsum('ij,jk,ik->i', points, self.A, points) + points @ self.b + self.c0

    def gradient(self, x):
        return self.A @ x + self.b

    def subdifferential(self, x):
        return Singleton(self.gradient(as_point(x, self.dim)))

    def lipschitz_on(self, center, radius):
        return float(np.linalg.norm(self.gradient(as_point(center, self.dim))) + self.curvature_on(center, radius) * radius)

    def curvature_on(self, center, radius):
        return float(np.linalg.norm(self.A, 2))


def linear(b, c0=0.0, id=None):
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return Quadratic(len(b), 0.0, b, c0, id=id)


class PowerNorm(AnalyticFunction):
    """
    s * ||x - z||^k with k >= 2, continuously differentiable.
    """
    kind = 'smooth'
    smooth = True

    def __init__(self, dim, scale=1.0, power=2.0, center=None, id=None):
        super().__init__(dim, id)
        if power < 2:
            raise InputError("Power of the norm must be at least 2; use a scaled norm for power 1.")
        self.scale = float(scale)
        self.power = float(power)
        self.center = np.zeros(self.dim) if center is None else as_point(center, self.dim)
        self.convex = self.scale >= 0

    def evaluate(self, points):
        return self.scale * np.linalg.norm(np.atleast_2d(points) - self.center, axis=1) ** self.power

    def gradient(self, x):
        y = x - self.center
        r = np.linalg.norm(y)
        if r == 0:
            return np.zeros(self.dim)
        return self.scale * self.power * r ** (self.power - 2) * y

    def subdifferential(self, x):
        return Singleton(self.gradient(as_point(x, self.dim)))

    def _reach(self, center, radius):
        return float(np.linalg.norm(as_point(center, self.dim) - self.center) + radius)

    def lipschitz_on(self, center, radius):
        return abs(self.scale) * self.power * self._reach(center, radius) ** (self.power - 1)

    def curvature_on(self, center, radius):
        return abs(self.scale) * self.power * (self.power - 1) * self._reach(center, radius) ** (self.power - 2)


class ScaledNorm(AnalyticFunction):
    """
    s * ||x - z|| with s >= 0; the subdifferential at z is the ball of radius s.
    """
    kind = 'convex'
    convex = True

    def __init__(self, dim, scale=1.0, center=None, id=None):
        super().__init__(dim, id)
        if scale < 0:
            raise InputError("Norm scale must be nonnegative.")
        self.scale = float(scale)
        self.center = np.zeros(self.dim) if center is None else as_point(center, self.dim)

    def evaluate(self, points):
        return self.scale * np.linalg.norm(np.atleast_2d(points) - self.center, axis=1)

    def subdifferential(self, x):
        y = as_point(x, self.dim) - self.center
        r = np.linalg.norm(y)
        if r <= ACTIVE_TOLERANCE:
            return Ball(np.zeros(self.dim), self.scale)
        return Singleton(self.scale * y / r)

    def lipschitz_on(self, center, radius):
        return self.scale


class WeightedL1(AnalyticFunction):
    """
    sum_i w_i |x_i - z_i| with w >= 0.
    """
    kind = 'convex'
    convex = True

    def __init__(self, dim, weights=1.0, center=None, id=None):
        super().__init__(dim, id)
        weights = np.asarray(weights, dtype=float)
        self.weights = weights * np.ones(self.dim) if weights.ndim == 0 else as_point(weights, self.dim)
        if np.any(self.weights < 0):
            raise InputError("Weights of an l1 norm must be nonnegative.")
        self.center = np.zeros(self.dim) if center is None else as_point(center, self.dim)

    def evaluate(self, points):
        return np.abs(np.atleast_2d(points) - self.center) @ self.weights

    def subdifferential(self, x):
        y = as_point(x, self.dim) - self.center
        choices = [
            (w * np.sign(v),) if abs(v) > ACTIVE_TOLERANCE else (-w, w)
            for v, w in zip(y, self.weights)
        ]
        return Polytope(list(itertools.product(*choices)))

    def lipschitz_on(self, center, radius):
        return float(np.linalg.norm(self.weights))


class PiecewiseQuadratic(AnalyticFunction):
    """
    Pointwise max (or min) of quadratic pieces. Its subdifferential is the
    convex hull of the gradients of the active pieces.
    """
    kind = 'composite'
    reducer = None

    def __init__(self, dim, pieces, id=None):
        super().__init__(dim, id)
        if not pieces:
            raise InputError("A composite needs at least one piece.")
        if any(piece.dim != self.dim for piece in pieces):
            raise InputError("All pieces must share the composite's dimension.")
        self.pieces = list(pieces)

    def _piece_values(self, points):
        return np.stack([piece.evaluate(points) for piece in self.pieces], axis=-1)

    def evaluate(self, points):
        return self.reducer(self._piece_values(np.atleast_2d(points)), axis=-1)

    def active(self, x):
        values = self._piece_values(x[np.newaxis, :])[0]
        best = self.reducer(values)
        return [p for p, v in zip(self.pieces, values) if abs(v - best) <= ACTIVE_TOLERANCE * (1 + abs(best))]

    def subdifferential(self, x):
        x = as_point(x, self.dim)
        return Polytope([piece.gradient(x) for piece in self.active(x)])

    def lipschitz_on(self, center, radius):
        return max(piece.lipschitz_on(center, radius) for piece in self.pieces)

    def curvature_on(self, center, radius):
        return max(piece.curvature_on(center, radius) for piece in self.pieces)


class MaxOfQuadratics(PiecewiseQuadratic):
    reducer = staticmethod(np.max)

    def __init__(self, dim, pieces, id=None):
        super().__init__(dim, pieces, id)
        self.convex = all(piece.convex for piece in self.pieces)
        self.smooth = len(self.pieces) == 1


class MinOfQuadratics(PiecewiseQuadratic):
    """
    Clarke's rule only: a concave kink is Lipschitz but not F-regular.
    """
    reducer = staticmethod(np.min)

    def __init__(self, dim, pieces, id=None):
        super().__init__(dim, pieces, id)
        self.smooth = len(self.pieces) == 1
        self.f_regular = self.smooth
        self.convex = self.smooth and self.pieces[0].convex


class Sum(AnalyticFunction):
    """
    sum_i w_i f_i(x - offset) + constant
    """
    kind = 'sum'

    def __init__(self, terms, constant=0.0, offset=None, id=None):
        if not terms:
            raise InputError("A sum needs at least one term.")
        dims = {function.dim for _, function in terms}
        if len(dims) != 1:
            raise InputError(f"Cannot add functions of dimensions {sorted(dims)}.")

        super().__init__(dims.pop(), id)
        self.terms = [(float(w), function) for w, function in terms]
        self.constant = float(constant)
        self.offset = np.zeros(self.dim) if offset is None else as_point(offset, self.dim)

        live = [(w, f) for w, f in self.terms if w != 0]
        self.smooth = all(f.smooth for _, f in live)
        self.lipschitz = all(f.lipschitz for _, f in live)
        self.convex = all((w > 0 and f.convex) or is_affine(f) for w, f in live)
        self.f_regular = all((w > 0 and f.f_regular) or f.smooth for w, f in live)

    def evaluate(self, points):
        shifted = np.atleast_2d(points) - self.offset
        values = np.full(shifted.shape[0], self.constant)
        for w, function in self.terms:
            if w != 0:
                values = values + w * function.evaluate(shifted)
        return values

    def subdifferential(self, x):
        y = as_point(x, self.dim) - self.offset
        result = Singleton(np.zeros(self.dim))
        for w, function in self.terms:
            if w != 0:
                result = result + function.subdifferential(y).scale(w)
        return result

    def lipschitz_on(self, center, radius):
        center = as_point(center, self.dim) - self.offset
        return sum(abs(w) * f.lipschitz_on(center, radius) for w, f in self.terms if w != 0)

    def curvature_on(self, center, radius):
        center = as_point(center, self.dim) - self.offset
        return sum(abs(w) * f.curvature_on(center, radius) for w, f in self.terms if w != 0)


def is_affine(function):
    return isinstance(function, Quadratic) and not np.any(function.A)
