import enum
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from joblib import Parallel, delayed

from gromov_lab.core.config import settings
from gromov_lab.core.errors import CapExceeded, NegativeScale, ParameterError
from gromov_lab.schemas.report import DeviationReport, DeviationRow
from gromov_lab.services.correspondences import (
    Correspondence,
    distortion,
    full_correspondence,
    identity_correspondence,
    product_correspondence,
)
from gromov_lab.services.gh_solver import gh_exact, gh_lower_diam
from gromov_lab.services.metric_core import FiniteMetricSpace, l1_product, scale

logger = logging.getLogger(__name__)

# |A| * |X| above this runs ProductScale families in Sandwich mode
PRODUCT_EXACT_LIMIT = 8


class CurveKind(str, enum.Enum):
    SCALE = "Scale"
    PRODUCT_SCALE = "ProductScale"


class DeviationMode(str, enum.Enum):
    EXACT = "Exact"
    SANDWICH = "Sandwich"


@dataclass(frozen=True)
class CurveFamily:
    """t -> tX, or t -> A x_l1 (tX)."""

    kind: CurveKind
    base: FiniteMetricSpace
    factor: Optional[FiniteMetricSpace] = None

    def __post_init__(self):
        if self.kind is CurveKind.PRODUCT_SCALE:
            if self.factor is None:
                raise ParameterError("ProductScale family needs the factor A")
            size = self.factor.size * self.base.size
            if size > settings.MAX_SPACE_SIZE:
                raise CapExceeded("product family", size, settings.MAX_SPACE_SIZE)

    @classmethod
    def scaled(cls, x: FiniteMetricSpace) -> "CurveFamily":
        return cls(CurveKind.SCALE, x)

    @classmethod
    def product_scaled(cls, a: FiniteMetricSpace, x: FiniteMetricSpace) -> "CurveFamily":
        return cls(CurveKind.PRODUCT_SCALE, x, a)

    @property
    def point_count(self) -> int:
        if self.kind is CurveKind.SCALE:
            return self.base.size
        return self.factor.size * self.base.size


def sample_curve(family: CurveFamily, t_list: Sequence[float]) -> List[FiniteMetricSpace]:
    for t in t_list:
        if t < 0:
            raise NegativeScale(t)
    if family.kind is CurveKind.SCALE:
        return [scale(family.base, t) for t in t_list]
    return [l1_product(family.factor, scale(family.base, t)) for t in t_list]


# -----------------------------
# Pairwise measurements
# -----------------------------
def _explicit_upper(
    a: FiniteMetricSpace,
    b: FiniteMetricSpace,
    family: Optional[CurveFamily],
    s: float,
    t: float,
) -> float:
    """Distortion/2 of an explicit correspondence between two samples."""
    if family is not None and family.kind is CurveKind.PRODUCT_SCALE:
        if family.base.size ** 2 <= settings.SOLVER_CAP:
            factor_witness = gh_exact(scale(family.base, s), scale(family.base, t)).witness
        else:
            factor_witness = identity_correspondence(family.base.size)
        lifted = product_correspondence(identity_correspondence(family.factor.size), factor_witness)
        return distortion(lifted, a, b) / 2

    candidates: List[Correspondence] = [full_correspondence(a.size, b.size)]
    if a.size == b.size:
        candidates.insert(0, identity_correspondence(a.size))
    return min(distortion(rel, a, b) for rel in candidates) / 2


def _measure_pair(
    a: FiniteMetricSpace,
    b: FiniteMetricSpace,
    s: float,
    t: float,
    speed: float,
    exact: bool,
    family: Optional[CurveFamily],
    budget: Optional[int],
) -> Tuple[DeviationRow, bool]:
    target = speed * abs(s - t)
    lower = gh_lower_diam(a, b)
    upper = _explicit_upper(a, b, family, s, t)

    if exact:
        cert = gh_exact(a, b, budget=budget, workers=1)
        value = cert.value
        row = DeviationRow(
            s=s, t=t, lower=lower, upper=upper, exact=value,
            target=target, deviation=abs(value - target),
        )
        return row, cert.degraded

    deviation = max(0.0, lower - target, target - upper)
    row = DeviationRow(
        s=s, t=t, lower=lower, upper=upper, exact=None,
        target=target, deviation=deviation,
    )
    return row, False


def geodesic_deviation(
    samples: Sequence[FiniteMetricSpace],
    t_list: Sequence[float],
    speed: float,
    mode: DeviationMode = DeviationMode.EXACT,
    family: Optional[CurveFamily] = None,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
) -> DeviationReport:
    """
    Compare d_GH(sample_s, sample_t) with speed * |s - t| for every pair s < t.

    Exact mode solves each pair; Sandwich mode reports [diameter bound,
    explicit-correspondence bound] and the interval's distance to the target.
    ProductScale families too large for the solver fall back to Sandwich.
    """
    if len(samples) != len(t_list):
        raise ParameterError(f"{len(samples)} samples for {len(t_list)} parameters")
    mode = DeviationMode(mode)

    fell_back = False
    if mode is DeviationMode.EXACT and family is not None:
        if family.kind is CurveKind.PRODUCT_SCALE and family.point_count > PRODUCT_EXACT_LIMIT:
            logger.warning(
                "product family has %d points; falling back to Sandwich mode", family.point_count
            )
            mode = DeviationMode.SANDWICH
            fell_back = True

    order = sorted(range(len(t_list)), key=lambda k: (t_list[k], k))
    pairs = [(order[p], order[q]) for p in range(len(order)) for q in range(p + 1, len(order))]

    exact = mode is DeviationMode.EXACT
    if exact:
        for i, j in pairs:
            grid = samples[i].size * samples[j].size
            if grid > settings.SOLVER_CAP:
                raise CapExceeded("solver grid", grid, settings.SOLVER_CAP)

    jobs = settings.WORKERS if workers is None else workers
    tasks = (
        delayed(_measure_pair)(
            samples[i], samples[j], float(t_list[i]), float(t_list[j]),
            speed, exact, family, budget,
        )
        for i, j in pairs
    )
    if jobs > 1 and len(pairs) > 1:
        measured = Parallel(n_jobs=jobs)(tasks)
    else:
        measured = [fn(*args, **kwargs) for fn, args, kwargs in tasks]

    return DeviationReport(
        mode=mode.value,
        speed=speed,
        rows=[row for row, _ in measured],
        fell_back=fell_back,
        budget_exhausted=any(degraded for _, degraded in measured),
    )
