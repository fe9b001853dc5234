import logging
from typing import List, Optional

import click

from gromov_lab.core.errors import EXIT_CAP, EXIT_OK, ParameterError
from gromov_lab.services.correspondences import distortion, hausdorff_distance
from gromov_lab.services.gh_solver import gh_exact
from gromov_lab.services.metric_core import diameter, l1_product, scale
from gromov_lab.storage.files import (
    format_distance,
    read_correspondence,
    read_matrix,
    write_certificate,
    write_correspondence,
    write_matrix,
)

logger = logging.getLogger(__name__)


def _index_list(ctx, param, value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated indices, e.g. 0,2")


# -----------------------------
# Matrix files
# -----------------------------
@click.command("validate")
@click.argument("matrix_file", type=click.Path(dir_okay=False))
def validate(matrix_file: str) -> int:
    """Check a matrix file against the metric axioms."""
    space = read_matrix(matrix_file)
    click.echo(f"valid n={space.size} diam={format_distance(diameter(space))}")
    return EXIT_OK


@click.command("product")
@click.argument("first", type=click.Path(dir_okay=False))
@click.argument("second", type=click.Path(dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
def product(first: str, second: str, output: str) -> int:
    """Write the l1 product of two spaces."""
    space = l1_product(read_matrix(first), read_matrix(second))
    click.echo(str(write_matrix(space, output)))
    return EXIT_OK


@click.command("scale")
@click.argument("matrix_file", type=click.Path(dir_okay=False))
@click.argument("t", type=float)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
def scale_command(matrix_file: str, t: float, output: str) -> int:
    """Write tX."""
    space = scale(read_matrix(matrix_file), t)
    click.echo(str(write_matrix(space, output)))
    return EXIT_OK


# -----------------------------
# Distances
# -----------------------------
@click.command("gh")
@click.argument("first", type=click.Path(dir_okay=False))
@click.argument("second", type=click.Path(dir_okay=False))
@click.option("--budget", type=click.IntRange(min=1), default=None, help="Search node budget.")
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--certificate", type=click.Path(dir_okay=False), default=None,
              help="Also write the certificate and its witness here.")
@click.option("--witness", type=click.Path(dir_okay=False), default=None,
              help="Also write the witness correspondence here.")
def gh(first: str, second: str, budget: Optional[int], workers: Optional[int],
       certificate: Optional[str], witness: Optional[str]) -> int:
    """
    Exact Gromov-Hausdorff distance between two matrix files.
    Prints the value; exits 3 if the budget ran out before optimality was proved.
    """
    cert = gh_exact(read_matrix(first), read_matrix(second), budget=budget, workers=workers)
    click.echo(format_distance(cert.value))
    if certificate:
        click.echo(str(write_certificate(cert, certificate)))
    if witness:
        click.echo(str(write_correspondence(cert.witness, witness)))

    if cert.degraded:
        click.echo(
            f"budget exhausted after {cert.nodes_explored} nodes; "
            f"value is an upper bound, proved lower bound {format_distance(cert.lower_bound)}",
            err=True,
        )
        return EXIT_CAP
    return EXIT_OK


@click.command("distortion")
@click.argument("first", type=click.Path(dir_okay=False))
@click.argument("second", type=click.Path(dir_okay=False))
@click.argument("correspondence_file", type=click.Path(dir_okay=False))
def distortion_command(first: str, second: str, correspondence_file: str) -> int:
    """Distortion of a correspondence file between two spaces; half of it bounds d_GH."""
    x, y = read_matrix(first), read_matrix(second)
    corr = read_correspondence(correspondence_file)
    if (corr.n_x, corr.n_y) != (x.size, y.size):
        raise ParameterError(
            f"correspondence is {corr.n_x}x{corr.n_y} but the spaces have {x.size} and {y.size} points"
        )
    click.echo(format_distance(distortion(corr, x, y)))
    return EXIT_OK


@click.command("hausdorff")
@click.argument("matrix_file", type=click.Path(dir_okay=False))
@click.option("--i", "first", required=True, callback=_index_list, help="First subset, e.g. 0,1")
@click.option("--j", "second", required=True, callback=_index_list, help="Second subset")
def hausdorff(matrix_file: str, first: List[int], second: List[int]) -> int:
    """Hausdorff distance between two index subsets of one space."""
    value = hausdorff_distance(first, second, read_matrix(matrix_file))
    click.echo(format_distance(value))
    return EXIT_OK


commands = [validate, gh, product, scale_command, distortion_command, hausdorff]
