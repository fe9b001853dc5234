import enum
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from gromov_lab.core.config import settings
from gromov_lab.core.errors import CapExceeded, NegativeScale, ParameterError
from gromov_lab.schemas.report import SeriesPoint
from gromov_lab.services.correspondences import (
    CoverageState,
    Correspondence,
    distortion,
    full_correspondence,
    identity_correspondence,
    nonempty_subsets,
    product_correspondence,
)
from gromov_lab.services.metric_core import (
    FiniteMetricSpace,
    arithmetic_progression,
    diameter,
    from_reals,
    l1_product,
)

logger = logging.getLogger(__name__)

Images = Tuple[Tuple[int, ...], ...]


# Stored as string values in certificates and reports
class LowerProof(str, enum.Enum):
    EXHAUSTED_SEARCH = "ExhaustedSearch"
    DIAMETER_BOUND = "DiameterBound"
    CALLER_BUDGET_EXCEEDED = "CallerBudgetExceeded"


@dataclass(frozen=True)
class GHCertificate:
    """
    d_GH value with the correspondence achieving twice of it and the
    reason the value is known to be optimal (or why it may not be).
    """

    value: float
    witness: Correspondence
    lower_proof: LowerProof
    nodes_explored: int
    lower_bound: float

    @property
    def degraded(self) -> bool:
        return self.lower_proof is LowerProof.CALLER_BUDGET_EXCEEDED


def _images_to_correspondence(images: Images, n_y: int) -> Correspondence:
    pairs = tuple((i, j) for i, image in enumerate(images) for j in image)
    return Correspondence(pairs, len(images), n_y)


# -----------------------------
# Initial incumbent
# -----------------------------
def _greedy_correspondence(dx: np.ndarray, dy: np.ndarray) -> Correspondence:
    """
    Nearest-assignment bijection, padded until every Y-point is covered.
    Each step takes the pair that raises the running distortion least
    (lowest index on ties).
    """
    n_x, n_y = dx.shape[0], dy.shape[0]
    xs: List[int] = []
    ys: List[int] = []

    def increment(i: int, j: int) -> float:
        if not xs:
            return 0.0
        return float(np.abs(dx[i, xs] - dy[j, ys]).max())

    for i in range(n_x):
        free = [j for j in range(n_y) if j not in ys] or list(range(n_y))
        j = min(free, key=lambda c: (increment(i, c), c))
        xs.append(i)
        ys.append(j)

    for j in range(n_y):
        if j in ys:
            continue
        i = min(range(n_x), key=lambda c: (increment(c, j), c))
        xs.append(i)
        ys.append(j)

    return Correspondence(tuple(zip(xs, ys)), n_x, n_y)


def initial_incumbent(x: FiniteMetricSpace, y: FiniteMetricSpace) -> Tuple[float, Correspondence]:
    """Better of the full correspondence and the greedy one (greedy wins ties)."""
    greedy = _greedy_correspondence(x.dist, y.dist)
    full = full_correspondence(x.size, y.size)
    greedy_dis = distortion(greedy, x, y)
    full_dis = distortion(full, x, y)
    if full_dis < greedy_dis:
        return full_dis, full
    return greedy_dis, greedy


# -----------------------------
# Branch search
# -----------------------------
@dataclass
class BranchResult:
    """
    Outcome of searching the subtree under one image of X-point 0.
    `improvements` is the trajectory of recorded leaves as
    (node stamp, distortion, images), so any budget cut-off can be replayed.
    """

    nodes: int = 0
    completed: bool = True
    hit_lower: bool = False
    improvements: List[Tuple[int, float, Images]] = field(default_factory=list)


class _BranchSearch:
    def __init__(
        self,
        dx: np.ndarray,
        dy: np.ndarray,
        incumbent: float,
        lower: float,
        budget: int,
    ):
        self.dx = dx
        self.dy = dy
        self.n_x = dx.shape[0]
        self.n_y = dy.shape[0]
        self.best = incumbent
        self.found = False
        self.lower = lower
        self.budget = budget
        self.subsets = nonempty_subsets(self.n_y)
        self.state = CoverageState(self.n_y)
        self.xs: List[int] = []
        self.ys: List[int] = []
        self.images: List[Tuple[int, ...]] = []
        self.result = BranchResult()

    def _pruned(self, bound: float) -> bool:
        # before the first recorded leaf, ties with the incumbent are kept so
        # the lexicographically first optimum is the one recorded
        return bound > self.best or (self.found and bound >= self.best)

    def _cost(self, i: int, subset: Tuple[int, ...], partial: float) -> float:
        own = np.abs(self.dx[i, i] - self.dy[np.ix_(subset, subset)])
        cost = max(partial, float(own.max()))
        if self.xs:
            cross = np.abs(self.dx[i, self.xs][None, :] - self.dy[np.ix_(subset, self.ys)])
            cost = max(cost, float(cross.max()))
        return cost

    def _lookahead(self, i: int) -> float:
        """Every later X-point still needs one partner; the cheapest one bounds the leaf."""
        if i + 1 >= self.n_x:
            return 0.0
        rest = list(range(i + 1, self.n_x))
        gaps = np.abs(
            self.dx[np.ix_(rest, self.xs)][:, None, :] - self.dy[:, self.ys][None, :, :]
        )
        return float(gaps.max(axis=2).min(axis=1).max())

    def run(self, first: Tuple[int, ...]) -> BranchResult:
        self._visit(0, first, 0.0)
        return self.result

    def _visit(self, i: int, subset: Tuple[int, ...], partial: float) -> bool:
        """Expand one node; returns False when the whole search must stop."""
        result = self.result
        if result.nodes >= self.budget:
            result.completed = False
            return False
        result.nodes += 1

        cost = self._cost(i, subset, partial)
        if self._pruned(cost):
            return True

        self.state.push(subset)
        self.images.append(subset)
        self.xs.extend([i] * len(subset))
        self.ys.extend(subset)
        try:
            remaining = self.n_x - i - 1
            if not self.state.completable(remaining):
                return True
            if remaining == 0:
                self.best = cost
                self.found = True
                result.improvements.append((result.nodes, cost, tuple(self.images)))
                logger.debug("incumbent %r at node %d", cost, result.nodes)
                if cost == self.lower:
                    result.hit_lower = True
                    return False
                return True
            if self._pruned(max(cost, self._lookahead(i))):
                return True
            for nxt in self.subsets:
                if self.state.admits(nxt):
                    if not self._visit(i + 1, nxt, cost):
                        return False
                    if self._pruned(cost):
                        break
            return True
        finally:
            del self.xs[len(self.xs) - len(subset):]
            del self.ys[len(self.ys) - len(subset):]
            self.images.pop()
            self.state.pop(subset)


def _search_branch(
    dx: np.ndarray,
    dy: np.ndarray,
    first: Tuple[int, ...],
    incumbent: float,
    lower: float,
    budget: int,
) -> BranchResult:
    return _BranchSearch(dx, dy, incumbent, lower, budget).run(first)


def _top_branches(n_x: int, n_y: int) -> List[Tuple[int, ...]]:
    """Admissible images of X-point 0, in search order."""
    branches = []
    for subset in nonempty_subsets(n_y):
        state = CoverageState(n_y)
        state.push(subset)
        if state.completable(n_x - 1):
            branches.append(subset)
    return branches


# -----------------------------
# Exact solver
# -----------------------------
# Top-level branches searched per round against one shared incumbent
BRANCH_WAVE = 4


@dataclass
class _Tally:
    """Merged state of the branches replayed so far."""

    best: float
    remaining: int
    best_images: Optional[Images] = None
    nodes: int = 0
    proof: LowerProof = LowerProof.EXHAUSTED_SEARCH


class GHSolver:
    """
    Exact Gromov-Hausdorff distance by branch-and-bound over minimal correspondences.

    Images of X-point 0 are searched in waves of BRANCH_WAVE branches. Every
    branch of a wave starts from the best distortion merged from the earlier
    waves, and results are merged in branch order with the node budget
    replayed, so the certificate (witness and node count) is the same for any
    worker count.
    """

    def __init__(
        self,
        budget: Optional[int] = None,
        cap: Optional[int] = None,
        workers: Optional[int] = None,
    ):
        self.budget = settings.MAX_NODES if budget is None else budget
        self.cap = settings.SOLVER_CAP if cap is None else cap
        self.workers = settings.WORKERS if workers is None else workers

    def solve(self, x: FiniteMetricSpace, y: FiniteMetricSpace) -> GHCertificate:
        if x.size * y.size > self.cap:
            raise CapExceeded("solver grid", x.size * y.size, self.cap)
        if self.budget < 1:
            raise ParameterError(f"node budget must be positive, got {self.budget}")

        lower_dis = abs(diameter(x) - diameter(y))
        incumbent, witness = initial_incumbent(x, y)
        branches = _top_branches(x.size, y.size)

        tally = _Tally(best=incumbent, remaining=self.budget)
        for start in range(0, len(branches), BRANCH_WAVE):
            wave = branches[start:start + BRANCH_WAVE]
            results = self._search_wave(x, y, wave, tally.best, lower_dis, tally.remaining)
            more = start + len(wave) < len(branches)
            if self._merge(tally, results, len(wave), more):
                break

        return self._certificate(tally, witness, lower_dis, y.size)

    def _search_wave(self, x, y, wave, incumbent, lower_dis, budget) -> List[BranchResult]:
        if self.workers > 1 and len(wave) > 1:
            return Parallel(n_jobs=min(self.workers, len(wave)))(
                delayed(_search_branch)(x.dist, y.dist, first, incumbent, lower_dis, budget)
                for first in wave
            )

        results = []
        remaining = budget
        for first in wave:
            result = _search_branch(x.dist, y.dist, first, incumbent, lower_dis, remaining)
            results.append(result)
            remaining -= result.nodes
            if result.hit_lower or not result.completed or remaining <= 0:
                break
        return results

    @staticmethod
    def _merge(tally: _Tally, results: Sequence[BranchResult], wave_size: int, more: bool) -> bool:
        """Replay one wave into the tally; True when the search must stop."""
        for index, result in enumerate(results):
            complete = result.completed and result.nodes <= tally.remaining
            used = result.nodes if complete else tally.remaining
            for stamp, cost, images in result.improvements:
                if stamp > used:
                    break
                if cost < tally.best or (cost == tally.best and tally.best_images is None):
                    tally.best, tally.best_images = cost, images
            tally.nodes += used
            tally.remaining -= used
            if not complete:
                tally.proof = LowerProof.CALLER_BUDGET_EXCEEDED
                return True
            if result.hit_lower:
                tally.proof = LowerProof.DIAMETER_BOUND
                return True
            if tally.remaining <= 0 and (index + 1 < wave_size or more):
                tally.proof = LowerProof.CALLER_BUDGET_EXCEEDED
                return True
        return False

    def _certificate(
        self,
        tally: _Tally,
        witness: Correspondence,
        lower_dis: float,
        n_y: int,
    ) -> GHCertificate:
        if tally.best_images is not None:
            witness = _images_to_correspondence(tally.best_images, n_y)

        value = tally.best / 2
        if tally.proof is LowerProof.CALLER_BUDGET_EXCEEDED:
            logger.warning("node budget %d exhausted; best known value %r", self.budget, value)
            lower_bound = lower_dis / 2
        else:
            lower_bound = value
        return GHCertificate(
            value=value,
            witness=witness,
            lower_proof=tally.proof,
            nodes_explored=tally.nodes,
            lower_bound=lower_bound,
        )


def gh_exact(
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    budget: Optional[int] = None,
    cap: Optional[int] = None,
    workers: Optional[int] = None,
) -> GHCertificate:
    return GHSolver(budget=budget, cap=cap, workers=workers).solve(x, y)


# -----------------------------
# Bounds and closed forms
# -----------------------------
def gh_lower_diam(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """|diam X - diam Y| / 2."""
    return abs(diameter(x) - diameter(y)) / 2


def gh_scaling_value(x: FiniteMetricSpace, t1: float, t2: float) -> float:
    """d_GH(t1 X, t2 X) = |t1 - t2| diam X / 2."""
    if t1 < 0:
        raise NegativeScale(t1)
    if t2 < 0:
        raise NegativeScale(t2)
    return abs(t1 - t2) * diameter(x) / 2


def product_bound_constraint(n: int, w: float, t: float, diam_y: float) -> float:
    """
    Lower bound on a correspondence distortion c implied by
    c + 2w/(2n+1) + 2n/(2n+1) diam Y >= 2n/(2n+1) t, clamped at 0.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if w < 0 or t < 0 or diam_y < 0:
        raise ParameterError("w, t and diam_Y must be non-negative")
    bound = (2 * n * (t - diam_y) - 2 * w) / (2 * n + 1)
    return max(bound, 0.0)


def product_upper_bound(
    a1: FiniteMetricSpace,
    a2: FiniteMetricSpace,
    b1: FiniteMetricSpace,
    b2: FiniteMetricSpace,
    budget: Optional[int] = None,
) -> Tuple[float, Correspondence]:
    """
    Explicit upper bound for d_GH(A1 x B1, A2 x B2): the product of the two
    optimal factor witnesses, whose distortion is at most the sum of theirs.
    """
    first = gh_exact(a1, a2, budget=budget).witness
    second = gh_exact(b1, b2, budget=budget).witness
    product = product_correspondence(first, second)
    bound = distortion(product, l1_product(a1, b1), l1_product(a2, b2)) / 2
    return bound, product


def truncation_lower_series(
    gap: float,
    k_list: Sequence[int],
    x: FiniteMetricSpace,
    y: FiniteMetricSpace,
    budget: Optional[int] = None,
    cap: Optional[int] = None,
) -> List[SeriesPoint]:
    """
    d_GH(A_k x X, A_k x Y) for A_k = {0, gap, ..., (k-1) gap}.

    Each value is sandwiched between (diam X - diam Y)/2 and the upper bound
    of identity-on-A_k times the optimal (X, Y) witness.
    """
    limit = settings.SOLVER_CAP if cap is None else cap
    separation = 100 * (diameter(x) + diameter(y))
    if gap <= separation:
        logger.warning("gap %r is not above the recommended separation %r", gap, separation)

    for k in k_list:
        size = (k * x.size) * (k * y.size)
        if size > limit:
            raise CapExceeded(f"truncation k={k}", size, limit)

    base = gh_exact(x, y, budget=budget, cap=limit)
    target = (diameter(x) - diameter(y)) / 2

    series = []
    for k in k_list:
        block = from_reals(arithmetic_progression(k, gap))
        p = l1_product(block, x)
        q = l1_product(block, y)
        cert = gh_exact(p, q, budget=budget, cap=limit)
        lifted = product_correspondence(identity_correspondence(k), base.witness)
        series.append(
            SeriesPoint(
                k=k,
                value=cert.value,
                lower_proof=cert.lower_proof.value,
                lower_target=target,
                upper_bound=distortion(lifted, p, q) / 2,
                nodes_explored=cert.nodes_explored,
            )
        )
    return series
