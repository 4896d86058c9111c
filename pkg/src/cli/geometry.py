"""Projection, ground-truth rasterisation and feature pulling commands."""
from pathlib import Path
from typing import Optional

import click
import numpy as np
from rich.console import Console

from src.cli.utils.errors import exit_on_error
from src.cli.utils.formatters import format_features_csv, format_pixels_csv, format_summary_table
from src.cli.utils.validators import build_grid, parse_anchor, parse_classes
from src.config.config import (
    DEFAULT_N_COARSE,
    DEFAULT_POINTS_PER_PILLAR,
    DEFAULT_RESOLUTION,
    DEFAULT_SIDE_METERS,
    DEFAULT_Z_MAX,
    DEFAULT_Z_MIN,
)
from src.converter import codecs
from src.dto.bev_dto import ObjectClass
from src.dto.sampling_dto import SamplingConfig
from src.logging.logging import get_logger
from src.services.bev_ground_truth import build_targets, rasterize as rasterize_boxes
from src.services.sampling import make_pillars, pull_features, select_coarse_anchors
from src.services.sphere_projection import project_array

console = Console(stderr=True)
logger = get_logger(__name__)

_existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)
_output_file = click.Path(dir_okay=False, path_type=Path)
_classes = click.Choice([c.value for c in ObjectClass])


@click.command()
@click.option('--calib', required=True, type=_existing_file, help='Calibration JSON')
@click.option('--points', required=True, type=_existing_file, help='Little-endian float32 XYZ triples')
@click.option('--out', type=_output_file, default=None, help='Write the CSV here instead of stdout')
def project(calib: Path, points: Path, out: Optional[Path]) -> None:
    """
    Project 3D points into dual-fisheye pixel coordinates.

    Prints one `u,v` CSV line per input point.
    """
    with exit_on_error('project'):
        cal = codecs.read_calibration(calib)
        pts = codecs.read_points(points)
        text = format_pixels_csv(project_array(pts, cal))
        logger.info("Projected points", count=len(pts))
        if out is not None:
            out.write_text(text, encoding='utf-8')
            console.print(f"[green]✓[/green] {len(pts)} points projected to {out}")
        else:
            click.echo(text, nl=False)


@click.command()
@click.option('--annotations', required=True, type=_existing_file, help='Annotation JSON')
@click.option('--out', required=True, type=_output_file, help='Label grid (PGM)')
@click.option('--class', 'classes', multiple=True, type=_classes, help='Classes to keep (default: vehicle)')
@click.option('--side', type=float, default=DEFAULT_SIDE_METERS, show_default=True, help='Grid side in metres')
@click.option('--res', 'resolution', type=float, default=DEFAULT_RESOLUTION, show_default=True, help='Cell size in metres')
@click.option('--centerness', type=_output_file, default=None, help='Also write the centerness target (f32 raster)')
@click.option('--offset', type=_output_file, default=None, help='Also write the 2-channel offset target (f32 raster)')
def rasterize(
    annotations: Path,
    out: Path,
    classes: tuple[str, ...],
    side: float,
    resolution: float,
    centerness: Optional[Path],
    offset: Optional[Path],
) -> None:
    """Rasterise 3D box footprints into a BEV occupancy grid."""
    spec = build_grid(side, resolution)
    with exit_on_error('rasterize'):
        boxes = codecs.read_annotations(annotations)
        class_filter = parse_classes(classes)
        if centerness is None and offset is None:
            grid = rasterize_boxes(boxes, spec, class_filter)
        else:
            targets = build_targets(boxes, spec, class_filter)
            grid = targets.segmentation
            if centerness is not None:
                codecs.write_grid(centerness, targets.centerness)
            if offset is not None:
                codecs.write_raster(offset, spec, targets.offset)
        codecs.write_pgm(out, grid)
        logger.info("Rasterised boxes", boxes=len(boxes), positive_cells=int(grid.values.sum()), path=str(out))
        console.print(format_summary_table(
            {'boxes': len(boxes), 'cells': spec.cells, 'positive_cells': int(grid.values.sum())},
            title='Ground truth',
        ))


@click.command()
@click.option('--calib', required=True, type=_existing_file, help='Calibration JSON')
@click.option('--featmap', required=True, type=_existing_file, help='Feature map (FMAP)')
@click.option('--anchor', 'anchors', multiple=True, help='ROW,COL cell to pull (repeatable); default: coarse anchors')
@click.option('--n-coarse', type=int, default=DEFAULT_N_COARSE, show_default=True, help='Coarse anchor count when no --anchor is given')
@click.option('--points-per-pillar', type=int, default=DEFAULT_POINTS_PER_PILLAR, show_default=True)
@click.option('--z-min', type=float, default=DEFAULT_Z_MIN, show_default=True)
@click.option('--z-max', type=float, default=DEFAULT_Z_MAX, show_default=True)
@click.option('--side', type=float, default=DEFAULT_SIDE_METERS, show_default=True, help='Grid side in metres')
@click.option('--res', 'resolution', type=float, default=DEFAULT_RESOLUTION, show_default=True, help='Cell size in metres')
@click.pass_context
def pull(
    ctx: click.Context,
    calib: Path,
    featmap: Path,
    anchors: tuple[str, ...],
    n_coarse: int,
    points_per_pillar: int,
    z_min: float,
    z_max: float,
    side: float,
    resolution: float,
) -> None:
    """
    Pull pillar features for BEV anchors.

    Prints `row,col,f0..fC-1` CSV with features mean-pooled over each pillar.
    """
    spec = build_grid(side, resolution)
    parsed = [parse_anchor(a) for a in anchors]
    with exit_on_error('pull'):
        cal = codecs.read_calibration(calib)
        fm = codecs.read_feature_map(featmap)
        cfg = SamplingConfig(
            n_coarse=n_coarse,
            k=1,
            points_per_pillar=points_per_pillar,
            z_min=z_min,
            z_max=z_max,
            seed=ctx.obj.get('seed', 0) if ctx.obj else 0,
        )
        cells = np.asarray(parsed, dtype=np.int64) if parsed else select_coarse_anchors(cfg, spec)
        volume = pull_features(make_pillars(cells, cfg, spec), fm, cal)
        pooled = volume.data.mean(axis=1) if len(volume) else np.empty((0, fm.channels))
        logger.info("Pulled pillar features", anchors=len(volume), channels=fm.channels)
        click.echo(format_features_csv(volume.anchors, pooled), nl=False)
