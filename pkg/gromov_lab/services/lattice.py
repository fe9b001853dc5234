import itertools
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

from joblib import Parallel, delayed

from gromov_lab.core.config import settings
from gromov_lab.core.errors import DimensionCapExceeded, ParameterError, SizeOverflow
from gromov_lab.schemas.report import LatticeReport, LatticeRow
from gromov_lab.services.metric_core import FiniteMetricSpace, euclidean_space

logger = logging.getLogger(__name__)

Radius = Union[int, float, Fraction, str]

# Floats become the nearest fraction with at most this denominator
MAX_DENOMINATOR = 10**9

# Below this many first-coordinate slices the box is counted in-process
_PARALLEL_MIN_SLICES = 2048


# -----------------------------
# Radii
# -----------------------------
def parse_radius(value: Radius) -> Fraction:
    """
    Exact radius from "p/q", an int, a Fraction, or a float/decimal string.
    Floats round to the nearest fraction with denominator <= 10**9, so 0.1
    means 1/10 and not its binary expansion.
    """
    if isinstance(value, Fraction):
        radius = value
    elif isinstance(value, int):
        radius = Fraction(value)
    elif isinstance(value, str) and "/" in value:
        p, q = value.split("/", 1)
        try:
            radius = Fraction(int(p), int(q))
        except (ValueError, ZeroDivisionError):
            raise ParameterError(f"bad rational radius {value!r}")
    else:
        try:
            radius = Fraction(float(value)).limit_denominator(MAX_DENOMINATOR)
        except (TypeError, ValueError, OverflowError):
            raise ParameterError(f"bad radius {value!r}")
    if radius < 0:
        raise ParameterError(f"radius must be non-negative, got {radius}")
    return radius


# -----------------------------
# Ball counts
# -----------------------------
@lru_cache(maxsize=65536)
def _count_within(n: int, bound: int) -> int:
    """Number of z in Z^n with z.z <= bound (integer bound)."""
    if bound < 0:
        return 0
    if n == 0:
        return 1
    top = math.isqrt(bound)
    if n == 1:
        return 2 * top + 1
    total = _count_within(n - 1, bound)
    for x in range(1, top + 1):
        total += 2 * _count_within(n - 1, bound - x * x)
    return total


def _count_slices(n: int, bound: int, xs: Sequence[int]) -> int:
    return sum(_count_within(n - 1, bound - x * x) for x in xs)


def ball_count(n: int, r: Radius, workers: Optional[int] = None) -> int:
    """
    Exact #{z in Z^n : |z| <= r}.

    The box [-floor(r), floor(r)]^n is walked one first coordinate at a time;
    since z.z is an integer, z.z <= r^2 iff z.z <= floor(p^2 / q^2) for r = p/q.
    """
    if n < 1:
        raise ParameterError(f"dimension must be >= 1, got {n}")
    if n > settings.LATTICE_MAX_DIM:
        raise DimensionCapExceeded("lattice dimension", n, settings.LATTICE_MAX_DIM)

    radius = parse_radius(r)
    bound = (radius.numerator ** 2) // (radius.denominator ** 2)
    top = math.isqrt(bound)

    jobs = settings.WORKERS if workers is None else workers
    if jobs > 1 and n > 1 and top >= _PARALLEL_MIN_SLICES:
        xs = list(range(-top, top + 1))
        chunks = [xs[k::jobs] for k in range(jobs)]
        partial = Parallel(n_jobs=jobs)(
            delayed(_count_slices)(n, bound, chunk) for chunk in chunks
        )
        return sum(partial)
    return _count_within(n, bound)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def volume_ratio(n: int, t: Radius) -> float:
    """N(t) / (Vol B_1 * t^n), which tends to 1."""
    radius = parse_radius(t)
    if radius == 0:
        raise ParameterError("volume ratio needs t > 0")
    return ball_count(n, radius) / (unit_ball_volume(n) * float(radius) ** n)


# -----------------------------
# Lattice scaling experiments
# -----------------------------
def _check_scaling_parameters(lam: Radius, c: Radius) -> None:
    if not parse_radius(lam) > 1:
        raise ParameterError(f"lambda must exceed 1, got {lam}")
    parse_radius(c)


def _radii(lam: Radius, c: Radius, t: Radius):
    """B = ball of radius lam*t; B' = ball of radius t + c/lam (both in Z^n units)."""
    lam_q, c_q, t_q = parse_radius(lam), parse_radius(c), parse_radius(t)
    return lam_q * t_q, t_q + c_q / lam_q


def ratio_series(
    n: int,
    lam: Radius,
    c: Radius,
    t_list: Sequence[Radius],
) -> LatticeReport:
    """N(t) = #B_{lam t}, N'(t) = #B_{t + c/lam} and their ratio for each t."""
    _check_scaling_parameters(lam, c)
    rows = []
    witness_t = None
    for t in t_list:
        big, small = _radii(lam, c, t)
        count = ball_count(n, big)
        count_prime = ball_count(n, small)
        ratio = count / count_prime if count_prime > 0 else None
        t_value = float(parse_radius(t))
        rows.append(LatticeRow(t=t_value, N=count, Nprime=count_prime, ratio=ratio))
        if witness_t is None and count > count_prime:
            witness_t = t_value

    return LatticeReport(
        n=n,
        lam=float(parse_radius(lam)),
        c=float(parse_radius(c)),
        rows=rows,
        witness_t=witness_t,
    )


def witness_radius(
    n: int,
    lam: Radius,
    c: Radius,
    t_grid: Sequence[Radius],
) -> Optional[float]:
    """
    Smallest grid t with N(t) > N'(t), or None.

    A witness means no bijective correspondence between Z^n and lam Z^n has
    distortion <= c: a bijection would map B into B', forcing N'(t) >= N(t).
    """
    if not t_grid:
        raise ParameterError("witness grid must be nonempty")
    grid = [parse_radius(t) for t in t_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("witness grid must be strictly increasing")
    _check_scaling_parameters(lam, c)

    for t, t_q in zip(t_grid, grid):
        big, small = _radii(lam, c, t_q)
        if ball_count(n, big) > ball_count(n, small):
            logger.info("witness at t=%s for n=%d lambda=%s c=%s", t, n, lam, c)
            return float(t_q)
    return None


# -----------------------------
# Windows of Z^n
# -----------------------------
def zn_window(n: int, k: int, max_size: Optional[int] = None) -> FiniteMetricSpace:
    """{-k..k}^n with the Euclidean metric; labels like "-1,0"."""
    if n < 1 or k < 0:
        raise ParameterError(f"need n >= 1 and k >= 0, got n={n} k={k}")
    size = (2 * k + 1) ** n
    cap = settings.MAX_SPACE_SIZE if max_size is None else max_size
    if size > cap:
        raise SizeOverflow("lattice window", size, cap)

    coords = list(itertools.product(range(-k, k + 1), repeat=n))
    labels = [",".join(str(v) for v in point) for point in coords]
    return euclidean_space(coords, labels)

