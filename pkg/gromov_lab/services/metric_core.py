import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from gromov_lab.core.config import settings
from gromov_lab.core.errors import (
    Asymmetric,
    InvalidPointSet,
    MetricError,
    NegativeEntry,
    NegativeScale,
    NonBijectivePairing,
    NonPositiveConstant,
    NonZeroDiagonal,
    SizeMismatch,
    SizeOverflow,
    TriangleViolation,
)
from gromov_lab.core.random import Lcg64

logger = logging.getLogger(__name__)

EPS = settings.EPS


# -----------------------------
# Domain Types
# -----------------------------
@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """
    Labelled symmetric distance matrix.

    Construct through validate_metric() for untrusted input; the builders
    below produce valid matrices by construction and skip the O(n^3) check.
    Zero distances between distinct points are allowed so scale(X, 0) exists.
    """

    labels: Tuple[str, ...]
    dist: np.ndarray

    def __post_init__(self):
        dist = np.array(self.dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise MetricError(f"distance matrix must be square, got shape {dist.shape}")
        if dist.shape[0] < 1:
            raise MetricError("a metric space needs at least one point")
        if len(self.labels) != dist.shape[0]:
            raise MetricError(
                f"{len(self.labels)} labels for a {dist.shape[0]}-point matrix"
            )
        dist.setflags(write=False)
        object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))
        object.__setattr__(self, "dist", dist)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.size

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def submatrix(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        """Induced subspace on the given indices, in the given order."""
        idx = list(indices)
        return FiniteMetricSpace(
            labels=tuple(self.labels[i] for i in idx),
            dist=self.dist[np.ix_(idx, idx)],
        )


@dataclass(frozen=True)
class PointSet1D:
    """Finite subset of the real line, strictly increasing."""

    points: Tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        if not points:
            raise InvalidPointSet("point set must be nonempty")
        for a, b in zip(points, points[1:]):
            if not a < b:
                raise InvalidPointSet(f"points must be strictly increasing: {a!r} >= {b!r}")
        object.__setattr__(self, "points", points)


@dataclass(frozen=True)
class IsometryCheck:
    is_isometric: bool
    violation: Optional[Tuple[int, int, float, float]] = None


# -----------------------------
# Validation
# -----------------------------
def validate_metric(
    matrix,
    labels: Optional[Sequence[str]] = None,
    tolerance: Optional[float] = None,
) -> FiniteMetricSpace:
    """
    Check every metric axiom and return the space.
    The first offending indices (lexicographic) are named in the error.
    tolerance defaults to EPS; readers of rounded files pass a wider one.
    """
    dist = np.asarray(matrix, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise MetricError(f"distance matrix must be square, got shape {dist.shape}")
    if not np.all(np.isfinite(dist)):
        raise MetricError("distance matrix has non-finite entries")
    n = dist.shape[0]
    tol = EPS if tolerance is None else tolerance
    if labels is None:
        labels = [str(i) for i in range(n)]

    diagonal = np.flatnonzero(np.abs(np.diag(dist)) > tol)
    if diagonal.size:
        i = int(diagonal[0])
        raise NonZeroDiagonal(i, float(dist[i, i]))

    negative = np.argwhere(dist < -tol)
    if negative.size:
        raise NegativeEntry(int(negative[0][0]), int(negative[0][1]))

    asymmetric = np.argwhere(np.abs(dist - dist.T) > tol)
    if asymmetric.size:
        raise Asymmetric(int(asymmetric[0][0]), int(asymmetric[0][1]))

    # d[i,k] <= d[i,j] + d[j,k], one i-slab at a time
    for i in range(n):
        slab = dist[i][None, :] > dist[i][:, None] + dist + tol
        hits = np.argwhere(slab)
        if hits.size:
            j, k = hits[0]
            raise TriangleViolation(i, int(j), int(k))

    # entries within eps of the axioms are stored exactly symmetric, zero-diagonal, non-negative
    dist = np.maximum((dist + dist.T) / 2, 0.0)
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSpace(labels=tuple(labels), dist=dist)


def _check_size(n: int, max_size: Optional[int]) -> None:
    cap = settings.MAX_SPACE_SIZE if max_size is None else max_size
    if n > cap:
        raise SizeOverflow("space size", n, cap)


# -----------------------------
# Builders
# -----------------------------
def one_point_space(label: str = "*") -> FiniteMetricSpace:
    return FiniteMetricSpace(labels=(label,), dist=np.zeros((1, 1)))


def from_reals(points: PointSet1D) -> FiniteMetricSpace:
    """Subset of R with the induced metric |p - q|."""
    p = np.array(points.points, dtype=float)
    return FiniteMetricSpace(
        labels=tuple(f"p{i}" for i in range(len(p))),
        dist=np.abs(p[:, None] - p[None, :]),
    )


def arithmetic_progression(k: int, gap: float, start: float = 0.0) -> PointSet1D:
    """{start, start + gap, ..., start + (k-1) gap}."""
    if k < 1 or gap <= 0:
        raise InvalidPointSet(f"need k >= 1 and gap > 0, got k={k} gap={gap!r}")
    return PointSet1D(tuple(start + i * gap for i in range(k)))


def euclidean_space(coords, labels: Optional[Sequence[str]] = None) -> FiniteMetricSpace:
    coords = np.asarray(coords, dtype=float)
    if labels is None:
        labels = [f"q{i}" for i in range(coords.shape[0])]
    return FiniteMetricSpace(labels=tuple(labels), dist=cdist(coords, coords))


def random_space(rng: Lcg64, n: int, dim: int = 2, scale: float = 1.0) -> FiniteMetricSpace:
    """Seeded Euclidean point cloud."""
    return euclidean_space(rng.points(n, dim, scale))


# -----------------------------
# Transformations
# -----------------------------
def diameter(space: FiniteMetricSpace) -> float:
    return float(space.dist.max())


def scale(space: FiniteMetricSpace, t: float) -> FiniteMetricSpace:
    """tX; t = 0 collapses every distance to zero on the same labels."""
    if not (t >= 0) or not math.isfinite(t):
        raise NegativeScale(t)
    return FiniteMetricSpace(labels=space.labels, dist=space.dist * t)


def l1_product(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    max_size: Optional[int] = None,
) -> FiniteMetricSpace:
    """
    X x_l1 Y with d((x,y),(x',y')) = d_X(x,x') + d_Y(y,y').
    Point (i, j) has index i * |Y| + j; label "xLabel|yLabel".
    """
    n_x, n_y = x.size, y.size
    _check_size(n_x * n_y, max_size)

    dist = x.dist[:, None, :, None] + y.dist[None, :, None, :]
    labels = tuple(f"{a}|{b}" for a in x.labels for b in y.labels)
    return FiniteMetricSpace(labels=labels, dist=dist.reshape(n_x * n_y, n_x * n_y))


def add_constant(space: FiniteMetricSpace, c: float) -> FiniteMetricSpace:
    """X + c: every off-diagonal distance increased by c > 0."""
    if not c > 0:
        raise NonPositiveConstant(c)
    off_diagonal = 1.0 - np.eye(space.size)
    return FiniteMetricSpace(labels=space.labels, dist=space.dist + c * off_diagonal)


def check_isometry(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    pairing: Sequence[int],
) -> IsometryCheck:
    """
    Compare d_X[i][j] with d_Y[s(i)][s(j)] for the bijection s.
    Reports the first violating (i, j) in row-major order.
    """
    if x.size != y.size:
        raise SizeMismatch(x.size, y.size)
    sigma = [int(s) for s in pairing]
    if len(sigma) != x.size or sorted(sigma) != list(range(y.size)):
        raise NonBijectivePairing(f"pairing {sigma} is not a bijection onto 0..{y.size - 1}")

    permuted = y.dist[np.ix_(sigma, sigma)]
    bad = np.argwhere(np.abs(x.dist - permuted) > EPS)
    if not bad.size:
        return IsometryCheck(is_isometric=True)

    i, j = (int(v) for v in bad[0])
    return IsometryCheck(
        is_isometric=False,
        violation=(i, j, float(x.dist[i, j]), float(permuted[i, j])),
    )


def identity_pairing(n: int) -> List[int]:
    return list(range(n))


def real_line_example(
    reals: Iterable[float],
    interval: Iterable[float],
    c: float,
) -> Tuple[FiniteMetricSpace, FiniteMetricSpace]:
    """
    Finite truncations of P = (R + c) x_l1 [0,1] and Q = R x_l1 ([0,1] + c),
    both in row-major product order so the identity pairing lines them up.
    """
    line = from_reals(PointSet1D(tuple(reals)))
    segment = from_reals(PointSet1D(tuple(interval)))
    p = l1_product(add_constant(line, c), segment)
    q = l1_product(line, add_constant(segment, c))
    return p, q
