import logging
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from gromov_lab import __version__
from gromov_lab.core.config import settings
from gromov_lab.core.errors import EXIT_CAP, EXIT_OK, CapExceeded, ConfigInvalid, LabError
from gromov_lab.core.random import Lcg64
from gromov_lab.schemas.experiment import ExperimentConfig, ExperimentKind
from gromov_lab.schemas.report import RunManifest
from gromov_lab.services.geodesy import CurveFamily, DeviationMode, geodesic_deviation, sample_curve
from gromov_lab.services.gh_solver import gh_exact, truncation_lower_series
from gromov_lab.services.lattice import ratio_series, witness_radius
from gromov_lab.services.metric_core import (
    FiniteMetricSpace,
    PointSet1D,
    check_isometry,
    diameter,
    euclidean_space,
    from_reals,
    identity_pairing,
    l1_product,
    one_point_space,
    random_space,
    real_line_example,
)
from gromov_lab.storage.files import atomic_write_text, read_matrix
from gromov_lab.storage.reports import (
    deviation_csv,
    lattice_csv,
    records_to_csv,
    series_csv,
    write_manifest,
)

logger = logging.getLogger(__name__)

# Slack allowed when checking the product upper bound
PRODUCT_TOLERANCE = 1e-9

# Largest product the ProductUpper experiment hands to the solver
PRODUCT_POINT_LIMIT = 8


@dataclass
class ExperimentOutput:
    """CSV bodies keyed by file suffix, plus whether any result is degraded."""

    tables: Dict[str, str] = field(default_factory=dict)
    degraded: bool = False


@dataclass
class RunResult:
    exit_status: int
    outputs: List[Path]
    manifest_path: Path
    error: Optional[str] = None


# -----------------------------
# Space sources
# -----------------------------
def _space_from(
    config: ExperimentConfig,
    file_key: str,
    points_key: str,
    rng: Optional[Lcg64] = None,
    count_key: Optional[str] = None,
) -> Optional[FiniteMetricSpace]:
    """A space from a matrix file, an inline list of reals, or a seeded random cloud."""
    if config.has(file_key):
        return read_matrix(config.get_str(file_key))
    if config.has(points_key):
        try:
            return from_reals(PointSet1D(tuple(config.get_floats(points_key))))
        except LabError as exc:
            raise ConfigInvalid(points_key, exc.detail)
    if count_key and rng is not None and config.has(count_key):
        return random_space(rng, config.get_int(count_key), config.get_int("dim", 2))
    return None


def _progress(iterable, total: int, label: str):
    return tqdm(iterable, total=total, desc=label, disable=not sys.stderr.isatty())


# -----------------------------
# Experiment pipelines
# -----------------------------
def _scaling_geodesic(config: ExperimentConfig, rng: Lcg64) -> ExperimentOutput:
    x = _space_from(config, "space", "x_points", rng, "points")
    ts = config.get_floats("ts")
    try:
        mode = DeviationMode(config.get_str("mode", DeviationMode.EXACT.value))
    except ValueError:
        raise ConfigInvalid("mode", "expected Exact or Sandwich")

    factor = _space_from(config, "factor", "a_points")
    if factor is None:
        family = CurveFamily.scaled(x)
    else:
        family = CurveFamily.product_scaled(factor, x)

    speed = diameter(x) / 2
    report = geodesic_deviation(sample_curve(family, ts), ts, speed, mode=mode, family=family)
    logger.info("max deviation %r over %d pairs", report.max_deviation, len(report.rows))
    return ExperimentOutput(
        tables={"": deviation_csv(report)},
        degraded=report.budget_exhausted,
    )


def _perturbed_pair(rng: Lcg64, size: int, dim: int, amount: float):
    coords = rng.points(size, dim)
    noise = rng.points(size, dim, amount)
    return euclidean_space(coords), euclidean_space(coords + noise)


def _product_upper(config: ExperimentConfig, rng: Lcg64) -> ExperimentOutput:
    trials = config.get_int("trials")
    a_size = config.get_int("a_size", 2)
    b_size = config.get_int("b_size", 2)
    dim = config.get_int("dim", 2)
    amount = config.get_float("perturbation", 0.1)
    if a_size * b_size > PRODUCT_POINT_LIMIT:
        raise ConfigInvalid("a_size", f"products must have at most {PRODUCT_POINT_LIMIT} points")

    records = []
    degraded = False
    for trial in _progress(range(trials), trials, "product upper"):
        a1, a2 = _perturbed_pair(rng, a_size, dim, amount)
        b1 = random_space(rng, b_size, dim)
        b2 = random_space(rng, b_size, dim)
        left = gh_exact(a1, a2)
        right = gh_exact(b1, b2)
        product = gh_exact(l1_product(a1, b1), l1_product(a2, b2))
        degraded = degraded or left.degraded or right.degraded or product.degraded
        bound = left.value + right.value
        holds = product.value <= bound + PRODUCT_TOLERANCE
        if not holds:
            logger.error("trial %d: product value %r above bound %r", trial, product.value, bound)
        records.append({
            "trial": trial,
            "gh_product": product.value,
            "gh_a": left.value,
            "gh_b": right.value,
            "bound": bound,
            "holds": holds,
        })

    columns = ["trial", "gh_product", "gh_a", "gh_b", "bound", "holds"]
    return ExperimentOutput(tables={"": records_to_csv(records, columns)}, degraded=degraded)


def _truncation_lower(config: ExperimentConfig, rng: Lcg64) -> ExperimentOutput:
    x = _space_from(config, "x", "x_points")
    y = _space_from(config, "y", "y_points") or one_point_space()
    series = truncation_lower_series(config.get_float("gap"), config.get_ints("ks"), x, y)
    degraded = any(point.lower_proof == "CallerBudgetExceeded" for point in series)
    return ExperimentOutput(tables={"": series_csv(series)}, degraded=degraded)


def _lattice_ratio(config: ExperimentConfig, rng: Lcg64) -> ExperimentOutput:
    report = ratio_series(
        config.get_int("n"),
        config.get_str("lambda"),
        config.get_str("c"),
        config.get_floats("ts"),
    )
    return ExperimentOutput(tables={"": lattice_csv(report)})


def _lattice_witness(config: ExperimentConfig, rng: Lcg64) -> ExperimentOutput:
    if config.has("grid"):
        grid = config.get_floats("grid")
    else:
        grid = [float(t) for t in range(1, config.get_int("tmax") + 1)]
    n, lam, c = config.get_int("n"), config.get_str("lambda"), config.get_str("c")

    report = ratio_series(n, lam, c, grid)
    witness = witness_radius(n, lam, c, grid)
    if witness != report.witness_t:
        raise LabError(f"witness mismatch: {witness} vs {report.witness_t}")
    return ExperimentOutput(tables={"": lattice_csv(report)})


def _isometry_example(config: ExperimentConfig, rng: Lcg64) -> ExperimentOutput:
    p, q = real_line_example(
        config.get_floats("reals"),
        config.get_floats("interval"),
        config.get_float("c"),
    )
    check = check_isometry(p, q, identity_pairing(p.size))
    record = {"isometric": check.is_isometric, "i": None, "j": None, "d_p": None, "d_q": None}
    if check.violation is not None:
        i, j, d_p, d_q = check.violation
        record.update({"i": i, "j": j, "d_p": d_p, "d_q": d_q})
    columns = ["isometric", "i", "j", "d_p", "d_q"]
    return ExperimentOutput(tables={"": records_to_csv([record], columns)})


PIPELINES: Dict[ExperimentKind, Callable[[ExperimentConfig, Lcg64], ExperimentOutput]] = {
    ExperimentKind.SCALING_GEODESIC: _scaling_geodesic,
    ExperimentKind.PRODUCT_UPPER: _product_upper,
    ExperimentKind.TRUNCATION_LOWER: _truncation_lower,
    ExperimentKind.LATTICE_RATIO: _lattice_ratio,
    ExperimentKind.LATTICE_WITNESS: _lattice_witness,
    ExperimentKind.ISOMETRY_EXAMPLE: _isometry_example,
}


# -----------------------------
# Runner
# -----------------------------
def _versions() -> Dict[str, str]:
    return {
        "gromov_lab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
    }


def run_experiment(
    config: ExperimentConfig,
    output_dir: Optional[Union[str, Path]] = None,
) -> RunResult:
    """
    Run one experiment: CSV report(s) plus a manifest under output_dir.

    Exit status 0 on success, 3 when a cap or the node budget cut the run
    short (whatever was computed is still written). Config problems raise.
    """
    config.require()
    directory = Path(output_dir or settings.OUTPUT_DIR)
    rng = Lcg64(config.seed)
    started = time.perf_counter()
    logger.info("running %s (%s)", config.name, config.kind.value)

    outputs: List[Path] = []
    error = None
    try:
        result = PIPELINES[config.kind](config, rng)
        exit_status = EXIT_CAP if result.degraded else EXIT_OK
        for suffix, body in sorted(result.tables.items()):
            outputs.append(atomic_write_text(directory / f"{config.name}{suffix}.csv", body))
    except CapExceeded as exc:
        exit_status = exc.exit_code
        error = exc.detail
        logger.error("%s", exc.detail)

    elapsed = time.perf_counter() - started
    manifest = RunManifest(
        name=config.name,
        kind=config.kind.value,
        seed=config.seed,
        config=dict(config.parameters),
        versions=_versions(),
        wall_time_s=elapsed,
        exit_status=exit_status,
        outputs=tuple(str(path) for path in outputs),
    )
    manifest_path = write_manifest(manifest, directory / f"{config.name}.manifest.txt")
    logger.info("finished %s in %.3fs with status %d", config.name, elapsed, exit_status)
    return RunResult(exit_status, outputs, manifest_path, error)
