"""Main CLI entry point for sphere-bev.

This module provides the command-line interface with global options and the
commands for projection, ground truth, sampling, scoring, synchronisation and
synthetic scenes.
"""

import os
import sys
from pathlib import Path
from typing import Optional

import click
from dotenv import load_dotenv
from rich.console import Console

from src.config.config import SPHEREBEV_SEED
from src.logging.logging import configure_structlog, get_logger

# Human-facing messages go to stderr; stdout is reserved for command output
console = Console(stderr=True)
logger = get_logger(__name__)

# Package version
try:
    from importlib.metadata import version
    __version__ = version('sphere-bev')
except Exception:
    __version__ = '1.0.0'


@click.group()
@click.option(
    '--env-file',
    type=click.Path(dir_okay=False, path_type=str),
    default=None,
    help='Path to .env file (default: .env in current directory)',
    envvar='ENV_FILE',
)
@click.option(
    '--seed',
    type=int,
    default=SPHEREBEV_SEED,
    show_default=True,
    help='Seed for random coarse anchors, synthetic scenes and simulated traces',
)
@click.option('--verbose', '-v', is_flag=True, help='Log at DEBUG level')
@click.version_option(version=__version__, prog_name='spherebev')
@click.pass_context
def cli(
    ctx: click.Context,
    env_file: Optional[str],
    seed: int,
    verbose: bool,
) -> None:
    """
    sphere-bev - Spherical camera to bird's-eye-view benchmark tools.

    Project points through a dual-fisheye calibration, rasterise BEV ground truth,
    run coarse-to-fine feature pulling, score losses and IoU, and synchronise
    multi-rate sensor streams.

    Examples:

        # Generate a synthetic scene and run the pipeline on it
        spherebev gen-scene --out scene/
        spherebev pipeline --calib scene/calib.json --featmap scene/featmap.fmap \\
            --decoder scene/decoder.json --gt scene/gt.pgm --out logits.f32

        # Simulate camera / LiDAR / GNSS synchronisation
        spherebev sync --simulate --duration 10
    """
    # Ensure context object exists
    ctx.ensure_object(dict)

    # Load environment file
    load_env_file(env_file)

    level = 'DEBUG' if verbose else os.getenv('SPHEREBEV_LOG_LEVEL')
    try:
        configure_structlog(level=level)
    except ValueError as e:
        console.print(f"[red]Error:[/red] {e}")
        sys.exit(2)
    logger.debug("CLI configured", seed=seed, verbose=verbose, env_file=env_file)

    # Store settings in context for child commands
    ctx.obj['env_file'] = env_file
    ctx.obj['seed'] = seed
    ctx.obj['verbose'] = verbose


def load_env_file(env_file: Optional[str] = None) -> None:
    """
    Load environment variables from .env file.

    Behavior:
    1. If env_file is specified, load from that file (error if not found)
    2. If not specified, try to load from default .env in current directory
    3. Otherwise rely on the process environment; no variable is mandatory

    Args:
        env_file: Path to custom .env file, or None to use default .env

    Raises:
        SystemExit: If an explicit env file does not exist
    """
    # Case 1: Custom env file specified
    if env_file:
        env_path = Path(env_file)
        if not env_path.exists():
            console.print(f"[red]Error: Environment file not found: {env_file}[/red]")
            sys.exit(2)
        load_dotenv(env_path)
        console.print(f"[dim]Loaded environment from: {env_file}[/dim]")
        return

    # Case 2: Try default .env file
    default_env = Path.cwd() / '.env'
    if default_env.exists():
        load_dotenv(default_env)
        console.print(f"[dim]Loaded environment from: {default_env}[/dim]")


@cli.command()
@click.pass_context
def version(ctx: click.Context) -> None:
    """Show version information."""
    console.print(f"[bold]sphere-bev[/bold] version [cyan]{__version__}[/cyan]")


# Import and register commands
from src.cli.geometry import project, pull, rasterize
from src.cli.pipeline import pipeline
from src.cli.scene import gen_scene
from src.cli.scoring import evaluate, loss
from src.cli.sync import sync

cli.add_command(project)
cli.add_command(rasterize)
cli.add_command(pull)
cli.add_command(pipeline)
cli.add_command(loss)
cli.add_command(evaluate)
cli.add_command(sync)
cli.add_command(gen_scene, name='gen-scene')


if __name__ == '__main__':
    cli()
