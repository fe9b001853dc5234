from typing import Optional, Sequence

import click

from gromov_lab import __version__
from gromov_lab.commands import experiments, lattice, solver
from gromov_lab.core.config import settings
from gromov_lab.core.errors import EXIT_OK, EXIT_USAGE, LabError
from gromov_lab.core.logging import setup_logging


@click.group(name=settings.PROJECT_NAME)
@click.version_option(__version__, prog_name=settings.PROJECT_NAME)
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose: bool):
    """Gromov-Hausdorff distances between finite metric spaces."""
    setup_logging("DEBUG" if verbose else None)


# Register command groups
for command in solver.commands:
    cli.add_command(command)
cli.add_command(lattice.lattice)
cli.add_command(experiments.run)


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command line and return its exit status instead of exiting.
    Usage errors map to 64, LabError to its own exit code.
    """
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name=settings.PROJECT_NAME,
            standalone_mode=False,
        )
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except LabError as exc:
        click.echo(exc.detail, err=True)
        return exc.exit_code
    return result if isinstance(result, int) else EXIT_OK
