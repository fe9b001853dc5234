import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from gromov_lab.core.config import settings
from gromov_lab.core.errors import (
    CapExceeded,
    EmptyRelation,
    EmptySubset,
    IndexOutOfRange,
    NotACorrespondence,
    ParameterError,
    SizeOverflow,
)
from gromov_lab.services.metric_core import FiniteMetricSpace

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


# -----------------------------
# Domain Types
# -----------------------------
@dataclass(frozen=True)
class Relation:
    """
    Nonempty set of index pairs (i, j) between an n_x-point and an n_y-point space.
    Pairs are kept sorted; per-side coverage counts make removability O(1).
    """

    pairs: Tuple[Pair, ...]
    n_x: int
    n_y: int
    row_cover: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    col_cover: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pairs = tuple(sorted({(int(i), int(j)) for i, j in self.pairs}))
        if not pairs:
            raise EmptyRelation()

        rows = [0] * self.n_x
        cols = [0] * self.n_y
        for i, j in pairs:
            if not (0 <= i < self.n_x and 0 <= j < self.n_y):
                raise IndexOutOfRange((i, j), self.n_x, self.n_y)
            rows[i] += 1
            cols[j] += 1

        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "row_cover", tuple(rows))
        object.__setattr__(self, "col_cover", tuple(cols))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def is_correspondence(self) -> bool:
        return all(self.row_cover) and all(self.col_cover)

    def removable_pairs(self) -> List[Pair]:
        """Pairs whose removal keeps both projections surjective."""
        return [
            (i, j) for i, j in self.pairs
            if self.row_cover[i] > 1 and self.col_cover[j] > 1
        ]

    def is_minimal(self) -> bool:
        return self.is_correspondence() and not self.removable_pairs()

    def image(self, i: int) -> FrozenSet[int]:
        """R(x_i): every Y-index paired with X-index i."""
        return frozenset(j for a, j in self.pairs if a == i)

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        idx = np.array(self.pairs, dtype=int)
        return idx[:, 0], idx[:, 1]


@dataclass(frozen=True)
class Correspondence(Relation):
    """Relation whose projections onto X and Y are both surjective."""

    def __post_init__(self):
        super().__post_init__()
        for side, cover in (("x", self.row_cover), ("y", self.col_cover)):
            for index, count in enumerate(cover):
                if count == 0:
                    raise NotACorrespondence(side, index)


def identity_correspondence(n: int) -> Correspondence:
    return Correspondence(tuple((i, i) for i in range(n)), n, n)


def full_correspondence(n_x: int, n_y: int) -> Correspondence:
    return Correspondence(tuple((i, j) for i in range(n_x) for j in range(n_y)), n_x, n_y)


# -----------------------------
# Distortion
# -----------------------------
def distortion(
    rel: Relation,
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
) -> float:
    """dis(rel) = max | d_X(i, i') - d_Y(j, j') | over pairs of pairs."""
    xs, ys = rel.as_arrays()
    if xs.max() >= x.size or ys.max() >= y.size:
        bad = next((i, j) for i, j in rel.pairs if i >= x.size or j >= y.size)
        raise IndexOutOfRange(bad, x.size, y.size)

    dx = x.dist[np.ix_(xs, xs)]
    dy = y.dist[np.ix_(ys, ys)]
    return float(np.abs(dx - dy).max())


def product_correspondence(
    r1: Correspondence,
    r2: Correspondence,
    max_size: Optional[int] = None,
) -> Correspondence:
    """
    R1 x R2 between A1 x B1 and A2 x B2, indexed like l1_product:
    ((a1, b1), (a2, b2)) -> (a1 * |B1| + b1, a2 * |B2| + b2).
    """
    n_x = r1.n_x * r2.n_x
    n_y = r1.n_y * r2.n_y
    cap = settings.MAX_SPACE_SIZE if max_size is None else max_size
    if max(n_x, n_y) > cap:
        raise SizeOverflow("product correspondence side", max(n_x, n_y), cap)

    pairs = tuple(
        (a1 * r2.n_x + b1, a2 * r2.n_y + b2)
        for a1, a2 in r1.pairs
        for b1, b2 in r2.pairs
    )
    return Correspondence(pairs, n_x, n_y)


# -----------------------------
# Hausdorff distance
# -----------------------------
def hausdorff_distance(
    first: Iterable[int],
    second: Iterable[int],
    space: FiniteMetricSpace,
) -> float:
    """Hausdorff distance between two index subsets of one finite space."""
    i_idx = sorted(set(int(i) for i in first))
    j_idx = sorted(set(int(j) for j in second))
    if not i_idx:
        raise EmptySubset("I")
    if not j_idx:
        raise EmptySubset("J")
    for index in i_idx + j_idx:
        if not 0 <= index < space.size:
            raise ParameterError(f"index {index} outside 0..{space.size - 1}")

    block = space.dist[np.ix_(i_idx, j_idx)]
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


# -----------------------------
# Minimal correspondences
# -----------------------------
@lru_cache(maxsize=None)
def nonempty_subsets(n: int) -> Tuple[Tuple[int, ...], ...]:
    """Nonempty subsets of range(n) as sorted tuples, in lexicographic order."""
    subsets = [c for r in range(1, n + 1) for c in combinations(range(n), r)]
    return tuple(sorted(subsets))


class CoverageState:
    """
    Y-side bookkeeping for building minimal correspondences one X-point at a time.

    A correspondence is minimal iff every pair has a private endpoint, so a
    Y-point inside a multi-point image may be used by no other X-point, and a
    Y-point already used may not join a multi-point image.
    """

    def __init__(self, n_y: int):
        self.n_y = n_y
        self.use_count = [0] * n_y
        self.locked = [False] * n_y
        self.uncovered = n_y

    def admits(self, subset: Sequence[int]) -> bool:
        if len(subset) == 1:
            return not self.locked[subset[0]]
        return all(self.use_count[j] == 0 for j in subset)

    def push(self, subset: Sequence[int]) -> None:
        lock = len(subset) > 1
        for j in subset:
            if self.use_count[j] == 0:
                self.uncovered -= 1
            self.use_count[j] += 1
            if lock:
                self.locked[j] = True

    def pop(self, subset: Sequence[int]) -> None:
        for j in subset:
            self.use_count[j] -= 1
            if self.use_count[j] == 0:
                self.uncovered += 1
            self.locked[j] = False

    def completable(self, remaining: int) -> bool:
        """Whether `remaining` more X-points can finish a correspondence."""
        if remaining == 0:
            return self.uncovered == 0
        return not all(self.locked)


def _check_enumeration_cap(n_x: int, n_y: int, cap: Optional[int]) -> None:
    if n_x < 1 or n_y < 1:
        raise ParameterError(f"sizes must be positive, got ({n_x}, {n_y})")
    limit = settings.ENUMERATION_CAP if cap is None else cap
    if n_x * n_y > limit:
        raise CapExceeded("enumeration grid", n_x * n_y, limit)


def enumerate_minimal_correspondences(
    n_x: int,
    n_y: int,
    cap: Optional[int] = None,
) -> Iterator[Correspondence]:
    """
    Yield every minimal correspondence between an n_x- and an n_y-point set.

    Backtracks over the image of each X-point in turn; the stream is ordered
    lexicographically by the tuple of images (each image a sorted tuple).
    """
    _check_enumeration_cap(n_x, n_y, cap)
    subsets = nonempty_subsets(n_y)
    state = CoverageState(n_y)
    images: List[Tuple[int, ...]] = []

    def backtrack(i: int) -> Iterator[Correspondence]:
        if i == n_x:
            pairs = tuple((a, j) for a, image in enumerate(images) for j in image)
            yield Correspondence(pairs, n_x, n_y)
            return
        for subset in subsets:
            if not state.admits(subset):
                continue
            state.push(subset)
            if state.completable(n_x - i - 1):
                images.append(subset)
                yield from backtrack(i + 1)
                images.pop()
            state.pop(subset)

    yield from backtrack(0)
