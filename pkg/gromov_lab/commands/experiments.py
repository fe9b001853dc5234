from typing import Optional

import click

from gromov_lab.services.experiments import run_experiment
from gromov_lab.storage.files import read_experiment_config


@click.command("run")
@click.argument("config_file", type=click.Path(dir_okay=False))
@click.option("-o", "--output-dir", default=None, type=click.Path(file_okay=False),
              help="Defaults to GROMOV_LAB_OUTPUT_DIR.")
def run(config_file: str, output_dir: Optional[str]) -> int:
    """Run one experiment config; prints the exit status, then the files written."""
    config = read_experiment_config(config_file)
    result = run_experiment(config, output_dir)
    click.echo(f"status={result.exit_status} name={config.name}")
    for path in result.outputs:
        click.echo(str(path))
    click.echo(str(result.manifest_path))
    if result.error:
        click.echo(result.error, err=True)
    return result.exit_status
