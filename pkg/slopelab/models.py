import logging

import numpy as np
from scipy.spatial.distance import cdist

from slopelab.exceptions import InputError, DomainError, ImproperFunctionError

log = logging.getLogger(__name__)


"""
Extended reals
"""


class PlusInfinity:
    """
    The +inf of the extended real line. Arithmetic on it is refused so an
    infinite value can never leak into a sum or a quotient unnoticed.
    """
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def _refuse(self, *args):
        raise TypeError("Arithmetic on +inf is undefined; test finiteness first.")

    __add__ = __radd__ = __sub__ = __rsub__ = _refuse
    __mul__ = __rmul__ = __truediv__ = __rtruediv__ = _refuse
    __neg__ = __float__ = _refuse

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash('+inf')

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def json(self):
        return '+inf'

    def __repr__(self):
        return '+inf'


PLUS_INF = PlusInfinity()


def parse_extended(value):
    if isinstance(value, str):
        if value.strip() in ('+inf', 'inf'):
            return PLUS_INF
        raise InputError(f"Unknown extended real '{value}'. Only numbers and '+inf' are allowed.")
    return float(value)


"""
Metric spaces
"""


class MetricSpace:
    """
    Common interface of the finite metric spaces every operation runs on.
    Points are addressed by index; labels are the user-facing point ids.
    """
    spacing = None

    def __init__(self, labels):
        self.labels = [str(label) for label in labels]
        self._index = {label: i for i, label in enumerate(self.labels)}

        if len(self._index) != len(self.labels):
            raise InputError("Point ids must be unique.")

    @property
    def size(self):
        return len(self.labels)

    def __len__(self):
        return self.size

    def index(self, label):
        key = str(label)
        if key not in self._index:
            raise InputError(f"Unknown point id '{label}'.", witness=key)
        return self._index[key]

    def check_index(self, i):
        if not isinstance(i, (int, np.integer)) or not 0 <= i < self.size:
            raise InputError(f"Unknown point index {i}.", witness=str(i))
        return int(i)

    def distances_from(self, i) -> np.ndarray:
        raise NotImplementedError

    def distance(self, i, j):
        return float(self.distances_from(i)[j])

    def distance_matrix(self, indices=None) -> np.ndarray:
        indices = np.arange(self.size) if indices is None else np.asarray(indices)
        return np.array([self.distances_from(i)[indices] for i in indices])

    def ball(self, i, r, open_ball=False) -> np.ndarray:
        """
        Indices of { y : d(y, x_i) <= r }, or d < r for the open ball, in index order.
        """
        i = self.check_index(i)
        if r < 0:
            raise InputError("Ball radius must be nonnegative.")
        d = self.distances_from(i)
        mask = d < r if open_ball else d <= r
        mask[i] = not open_ball or r > 0
        return np.flatnonzero(mask)

    def diameter(self):
        return max((float(self.distances_from(i).max()) for i in range(self.size)), default=0.0)

    def subspace(self, indices):
        raise NotImplementedError

    def json(self):
        return {'size': self.size, 'points': self.labels}


class FiniteMetricSpace(MetricSpace):
    """
    Explicit point list with a distance matrix. Metric axioms are checked on
    construction unless the matrix comes from an already valid space.
    """

    def __init__(self, dist, labels=None, check=True, tolerance=1e-12):
        dist = np.array(dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or dist.shape[0] == 0:
            raise InputError("Distance matrix has to be a nonempty square matrix.")

        super().__init__(range(dist.shape[0]) if labels is None else labels)

        if len(self.labels) != dist.shape[0]:
            raise InputError(f"Got {len(self.labels)} point ids for a {dist.shape[0]}x{dist.shape[0]} matrix.")

        if check:
            validate_metric(dist, tolerance)

        self.dist = dist
        self.dist.setflags(write=False)

    def distances_from(self, i):
        return self.dist[i].copy()

    def distance_matrix(self, indices=None):
        if indices is None:
            return self.dist.copy()
        indices = np.asarray(indices)
        return self.dist[np.ix_(indices, indices)]

    def subspace(self, indices):
        indices = np.asarray(indices)
        return FiniteMetricSpace(self.distance_matrix(indices), [self.labels[i] for i in indices], check=False)

    def __repr__(self):
        return f"<FiniteMetricSpace(size={self.size})>"


def validate_metric(dist, tolerance=1e-12):
    n = dist.shape[0]

    if not np.all(np.isfinite(dist)):
        raise InputError("Distances must be finite.")

    diagonal = np.abs(np.diag(dist))
    if diagonal.max() > tolerance:
        i = int(diagonal.argmax())
        raise InputError("Distance from a point to itself must be 0.", witness=[i])

    asymmetry = np.abs(dist - dist.T)
    if asymmetry.max() > tolerance:
        i, j = np.unravel_index(asymmetry.argmax(), asymmetry.shape)
        raise InputError("Distance matrix is not symmetric.", witness=[int(i), int(j)])

    off_diagonal = dist + np.eye(n) * np.inf
    if n > 1 and off_diagonal.min() <= 0:
        i, j = np.unravel_index(off_diagonal.argmin(), off_diagonal.shape)
        raise InputError("Distinct points must be at a positive distance.", witness=[int(i), int(j)])

    for j in range(n):
        excess = dist - (dist[:, j:j + 1] + dist[j:j + 1, :])
        if excess.max() > tolerance:
            i, k = np.unravel_index(excess.argmax(), excess.shape)
            raise InputError("Triangle inequality violated: d(i,k) > d(i,j) + d(j,k).",
                             witness=[int(i), int(j), int(k)])


class EuclideanPoints(MetricSpace):
    """
    Finitely many points of R^n with the Euclidean distance.
    """

    def __init__(self, coords, labels=None, spacing=None):
        coords = np.array(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, np.newaxis]
        if coords.ndim != 2 or coords.shape[0] == 0:
            raise InputError("Point coordinates have to be a nonempty (points x dim) array.")

        super().__init__([format_point(x) for x in coords] if labels is None else labels)
        self.coords = coords
        self.coords.setflags(write=False)
        self.spacing = spacing

    @property
    def dim(self):
        return self.coords.shape[1]

    def distances_from(self, i):
        return np.linalg.norm(self.coords - self.coords[i], axis=1)

    def distance_matrix(self, indices=None):
        coords = self.coords if indices is None else self.coords[np.asarray(indices)]
        return cdist(coords, coords)

    def subspace(self, indices):
        indices = np.asarray(indices)
        return EuclideanPoints(self.coords[indices], [self.labels[i] for i in indices], spacing=self.spacing)

    def as_finite_space(self):
        return FiniteMetricSpace(cdist(self.coords, self.coords), self.labels, check=False)

    def nearest(self, point):
        point = as_point(point, self.dim)
        return int(np.argmin(np.linalg.norm(self.coords - point, axis=1)))

    def locate(self, point, tolerance=1e-9):
        i = self.nearest(point)
        if np.linalg.norm(self.coords[i] - as_point(point, self.dim)) > tolerance:
            raise InputError(f"Point {format_point(point)} is not a point of the space.", witness=format_point(point))
        return i

    def with_point(self, point, tolerance=1e-12):
        """
        Returns (space, index) where the space contains the given point.
        """
        point = as_point(point, self.dim)
        i = self.nearest(point)
        if np.linalg.norm(self.coords[i] - point) <= tolerance:
            return self, i
        coords = np.vstack([self.coords, point])
        return EuclideanPoints(coords, self.labels + [format_point(point)], spacing=self.spacing), self.size

    def __repr__(self):
        return f"<EuclideanPoints(size={self.size}, dim={self.dim})>"


class EuclideanGrid(EuclideanPoints):
    """
    Axis-aligned lattice of spacing h centered at `center`, intersected with the
    ball B(center; radius). Points outside the ball are dropped, never clamped.
    """

    def __init__(self, dim, center, radius, h, open_ball=False):
        if not isinstance(dim, (int, np.integer)) or not 1 <= dim <= 4:
            raise InputError("Grid dimension must be an integer from 1 to 4.")
        if not radius > 0:
            raise InputError("Grid radius must be positive.")
        if not 0 < h <= radius:
            raise InputError("Grid spacing h must satisfy 0 < h <= radius.")

        center = as_point(center, dim)
        steps = int(np.floor(radius / h + 1e-9))
        axis = np.arange(-steps, steps + 1) * h
        offsets = np.stack(np.meshgrid(*([axis] * dim), indexing='ij'), axis=-1).reshape(-1, dim)
        norms = np.linalg.norm(offsets, axis=1)
        keep = norms < radius * (1 - 1e-12) if open_ball else norms <= radius * (1 + 1e-12)

        super().__init__(center + offsets[keep], spacing=h)
        self.center = center
        self.radius = float(radius)
        self.h = float(h)
        self.open_ball = open_ball

    @property
    def center_index(self):
        return self.nearest(self.center)

    def json(self):
        return {
            'grid': {'dim': self.dim, 'center': self.center.tolist(), 'radius': self.radius, 'h': self.h},
            'size': self.size
        }

    def __repr__(self):
        return f"<EuclideanGrid(dim={self.dim}, radius={self.radius}, h={self.h}, size={self.size})>"


def as_point(point, dim):
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.shape != (dim,):
        raise InputError(f"Expected a point of dimension {dim}, got {point.tolist()}.")
    return point


def format_point(point):
    return ','.join(f"{float(v):.12g}" for v in np.atleast_1d(point))


"""
Fields
"""


class ScalarField:
    """
    Extended-real function on a metric space. Values of +inf are kept as a
    mask; the underlying float slot holds NaN and is never read as a number.
    """

    def __init__(self, space, values, finite=None, name=None, proper=True):
        values = np.asarray(values, dtype=float)
        if values.shape != (space.size,):
            raise InputError(f"Field needs {space.size} values, got shape {values.shape}.")

        finite = np.isfinite(values) if finite is None else np.asarray(finite, dtype=bool) & np.isfinite(values)

        if proper and not finite.any():
            raise ImproperFunctionError(f"Field '{name or 'f'}' is identically +inf.")

        self.space = space
        self.name = name
        self.finite = finite
        self.values = np.where(finite, values, np.nan)
        self.finite.setflags(write=False)
        self.values.setflags(write=False)

    @staticmethod
    def from_entries(space, entries, name=None):
        parsed = [parse_extended(v) for v in entries]
        values = [np.nan if v is PLUS_INF else v for v in parsed]
        return ScalarField(space, values, [v is not PLUS_INF for v in parsed], name=name)

    @staticmethod
    def sample(space, function, name=None):
        return ScalarField(space, function.evaluate(space.coords), name=name or function.id)

    def value(self, i):
        return float(self.values[i]) if self.finite[i] else PLUS_INF

    def finite_value(self, i):
        if not self.finite[i]:
            raise DomainError(f"Field '{self.name or 'f'}' is +inf at point '{self.space.labels[i]}'.",
                              witness=self.space.labels[i])
        return float(self.values[i])

    @property
    def domain(self):
        return np.flatnonzero(self.finite)

    def restrict(self, indices, subspace=None):
        indices = np.asarray(indices)
        subspace = self.space.subspace(indices) if subspace is None else subspace
        return ScalarField(subspace, self.values[indices], self.finite[indices], name=self.name)

    def scaled(self, factor):
        if factor < 0:
            raise InputError("Only nonnegative multiples of an extended-real field are defined.")
        return ScalarField(self.space, self.values * factor, self.finite, name=self.name)

    def shifted(self, constant):
        return ScalarField(self.space, self.values + constant, self.finite, name=self.name)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            if other.space is not self.space:
                raise InputError("Fields live on different spaces.")
            return ScalarField(self.space, self.values + other.values, self.finite & other.finite)
        return self.shifted(float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            if other.space is not self.space:
                raise InputError("Fields live on different spaces.")
            return ScalarField(self.space, self.values - other.values, self.finite & other.finite)
        return self.shifted(-float(other))

    def json(self):
        return [self.value(i) for i in range(self.space.size)]

    def __repr__(self):
        return f"<ScalarField(name='{self.name}', finite={int(self.finite.sum())}/{self.space.size})>"


"""
Convex sets
"""


class ConvexSet:
    """
    Compact convex set in canonical form conv(vertices) + radius * B.
    """

    def __init__(self, vertices, radius=0.0):
        vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        if vertices.size == 0:
            raise InputError("Vertex lists must be nonempty.")
        if radius < 0:
            raise InputError("Radius must be nonnegative.")

        self.vertices = np.unique(vertices, axis=0)
        self.radius = float(radius)

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def kind(self):
        if len(self.vertices) == 1:
            return 'ball' if self.radius > 0 else 'singleton'
        return 'sum' if self.radius > 0 else 'polytope'

    def support(self, direction):
        """
        sigma_S(d) = max <v, d> + r ||d||; accepts one direction or a stack of them.
        """
        direction = np.asarray(direction, dtype=float)
        values = direction @ self.vertices.T
        return values.max(axis=-1) + self.radius * np.linalg.norm(direction, axis=-1)

    def translate(self, vector):
        return ConvexSet(self.vertices + np.asarray(vector, dtype=float), self.radius)

    def scale(self, factor):
        return ConvexSet(self.vertices * factor, self.radius * abs(factor))

    def __add__(self, other):
        return MinkowskiSum(self, other)

    def sample_points(self, count, rng):
        """
        Points of the set off the vertex list: on radius shells around vertices
        or on segments between vertices.
        """
        k, n = self.vertices.shape
        if self.radius > 0:
            directions = rng.standard_normal((count, n))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            anchors = self.vertices[rng.integers(0, k, size=count)]
            return anchors + self.radius * directions
        if k > 1:
            first = rng.integers(0, k, size=count)
            second = (first + rng.integers(1, k, size=count)) % k
            weights = rng.uniform(0, 1, size=(count, 1))
            return weights * self.vertices[first] + (1 - weights) * self.vertices[second]
        return np.empty((0, n))

    def json(self):
        return {'kind': self.kind, 'vertices': self.vertices.tolist(), 'radius': self.radius}

    def __repr__(self):
        return f"<{type(self).__name__}(vertices={len(self.vertices)}, radius={self.radius})>"


class Singleton(ConvexSet):

    def __init__(self, vector):
        super().__init__(np.atleast_1d(np.asarray(vector, dtype=float))[np.newaxis, :])


class Polytope(ConvexSet):
    pass


class Ball(ConvexSet):

    def __init__(self, center, radius):
        super().__init__(np.atleast_1d(np.asarray(center, dtype=float))[np.newaxis, :], radius)


class MinkowskiSum(ConvexSet):

    def __init__(self, first, second):
        if first.dim != second.dim:
            raise InputError(f"Cannot add sets of dimension {first.dim} and {second.dim}.")
        vertices = (first.vertices[:, np.newaxis, :] + second.vertices[np.newaxis, :, :]).reshape(-1, first.dim)
        super().__init__(vertices, first.radius + second.radius)
        self.parts = (first, second)


"""
Subdifferential oracles
"""


class SubdifferentialOracle:
    """
    Point -> convex set (or None for an empty subdifferential), tagged with the
    catalog entry it was derived from.
    """

    def __init__(self, rule, provenance, dim):
        self.rule = rule
        self.provenance = provenance
        self.dim = dim

    @staticmethod
    def of(function):
        return SubdifferentialOracle(function.subdifferential, function.id, function.dim)

    def __call__(self, x):
        return self.rule(as_point(x, self.dim))

    def __repr__(self):
        return f"<SubdifferentialOracle(provenance='{self.provenance}', dim={self.dim})>"
