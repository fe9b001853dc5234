import click

from gromov_lab.core.errors import EXIT_OK
from gromov_lab.services.lattice import ball_count, witness_radius
from gromov_lab.storage.files import format_distance


@click.group("lattice")
def lattice():
    """Lattice point counts for Z^n."""


@lattice.command("count")
@click.argument("n", type=int)
@click.argument("radius")
def count(n: int, radius: str) -> int:
    """#{z in Z^n : |z| <= radius}; radius as p/q or a decimal."""
    click.echo(str(ball_count(n, radius)))
    return EXIT_OK


@lattice.command("witness")
@click.argument("n", type=int)
@click.argument("lam")
@click.argument("c")
@click.argument("tmax", type=click.IntRange(min=1))
def witness(n: int, lam: str, c: str, tmax: int) -> int:
    """First integer t <= tmax with N(t) > N'(t), or "none"."""
    t = witness_radius(n, lam, c, list(range(1, tmax + 1)))
    click.echo("none" if t is None else format_distance(t))
    return EXIT_OK
