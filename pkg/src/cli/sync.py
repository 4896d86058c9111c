"""Sensor-stream synchronisation command."""
from pathlib import Path
from typing import Optional

import click
from rich.console import Console

from src.cli.utils.errors import exit_on_error
from src.cli.utils.formatters import format_frames_csv, format_sync_table, to_json
from src.config.config import SENSOR_RATES_HZ, SYNC_QUEUE_SIZE, SYNC_REFERENCE, SYNC_SLOP
from src.converter import codecs
from src.dto.sync_dto import STREAM_ORDER, StreamId, SyncConfig
from src.logging.logging import get_logger
from src.services.synchronizer import generate_trace, synchronize

console = Console(stderr=True)
logger = get_logger(__name__)


@click.command()
@click.option('--trace', type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help='CSV trace: stream_id,timestamp')
@click.option('--simulate', is_flag=True, help='Synthesize a camera / LiDAR / GNSS trace instead of reading one')
@click.option('--duration', type=float, default=10.0, show_default=True, help='Simulated duration in seconds')
@click.option('--jitter', type=float, default=0.0, show_default=True, help='Simulated timestamp jitter (std, seconds)')
@click.option('--write-trace', type=click.Path(dir_okay=False, path_type=Path), default=None, help='Save the simulated trace as CSV')
@click.option('--slop', type=float, default=SYNC_SLOP, show_default=True, help='Maximum |dt| to the reference message')
@click.option('--queue', 'queue_size', type=int, default=SYNC_QUEUE_SIZE, show_default=True, help='Per-stream queue capacity')
@click.option(
    '--reference',
    type=click.Choice([s.value for s in StreamId]),
    default=SYNC_REFERENCE,
    show_default=True,
)
@click.pass_context
def sync(
    ctx: click.Context,
    trace: Optional[Path],
    simulate: bool,
    duration: float,
    jitter: float,
    write_trace: Optional[Path],
    slop: float,
    queue_size: int,
    reference: str,
) -> None:
    """
    Synchronise multi-rate sensor streams.

    Prints the emitted frames as CSV followed by a one-line JSON statistics footer.

    Examples:

        spherebev sync --trace trace.csv --slop 0.03 --queue 20

        spherebev --seed 7 sync --simulate --duration 10 --jitter 0.002
    """
    if (trace is None) == (not simulate):
        raise click.UsageError('Give exactly one of --trace or --simulate')

    with exit_on_error('sync'):
        if simulate:
            messages = generate_trace(SENSOR_RATES_HZ, jitter, duration, ctx.obj.get('seed', 0) if ctx.obj else 0)
            if write_trace is not None:
                codecs.write_trace(write_trace, messages)
        else:
            messages = codecs.read_trace(trace)

        present = {StreamId(m.stream_id) for m in messages} | {StreamId(reference)}
        streams = tuple(s for s in STREAM_ORDER if s in present)
        cfg = SyncConfig(reference=StreamId(reference), queue_size=queue_size, slop=slop, streams=streams)
        frames, stats = synchronize(messages, cfg)
        logger.info("Streams synchronised", frames=stats.frames_emitted, references=stats.reference_count)

        console.print(format_sync_table(stats))
        click.echo(format_frames_csv(frames, streams), nl=False)
        click.echo(to_json(stats.to_dict()))
