"""End-to-end BEV pipeline command."""
from pathlib import Path
from typing import Optional

import click
from rich.console import Console

from src.cli.utils.errors import exit_on_error
from src.cli.utils.formatters import format_iou_table, format_summary_table, to_json
from src.cli.utils.validators import build_grid, parse_ranges
from src.config.config import (
    DEFAULT_K,
    DEFAULT_N_COARSE,
    DEFAULT_POINTS_PER_PILLAR,
    DEFAULT_RESOLUTION,
    DEFAULT_SIDE_METERS,
    DEFAULT_THRESHOLD,
    DEFAULT_Z_MAX,
    DEFAULT_Z_MIN,
)
from src.converter import codecs
from src.dto.sampling_dto import SamplingConfig, SamplingStrategy
from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.services.bev_ground_truth import rasterize
from src.services.metrics import eff_score
from src.workflows.bev_pipeline_workflow import run_bev_pipeline

console = Console(stderr=True)
logger = get_logger(__name__)

_existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)
_output_file = click.Path(dir_okay=False, path_type=Path)


@click.command()
@click.option('--calib', required=True, type=_existing_file, help='Calibration JSON')
@click.option('--featmap', required=True, type=_existing_file, help='Feature map (FMAP)')
@click.option('--decoder', required=True, type=_existing_file, help='Decoder JSON')
@click.option('--out', required=True, type=_output_file, help='Dense logits (f32 raster)')
@click.option(
    '--strategy',
    type=click.Choice([s.value for s in SamplingStrategy]),
    default=SamplingStrategy.COARSE_FINE.value,
    show_default=True,
)
@click.option('--n-coarse', type=int, default=DEFAULT_N_COARSE, show_default=True, help='Coarse anchor count')
@click.option('--k', type=int, default=DEFAULT_K, show_default=True, help='Anchors kept for the fine pass')
@click.option('--no-fine', is_flag=True, help='Skip the fine pass')
@click.option('--random-coarse', is_flag=True, help='Seeded random coarse anchors instead of a uniform stride')
@click.option('--points-per-pillar', type=int, default=DEFAULT_POINTS_PER_PILLAR, show_default=True)
@click.option('--z-min', type=float, default=DEFAULT_Z_MIN, show_default=True)
@click.option('--z-max', type=float, default=DEFAULT_Z_MAX, show_default=True)
@click.option('--threshold', type=float, default=DEFAULT_THRESHOLD, show_default=True, help='Logit threshold (strict)')
@click.option('--side', type=float, default=DEFAULT_SIDE_METERS, show_default=True, help='Grid side in metres')
@click.option('--res', 'resolution', type=float, default=DEFAULT_RESOLUTION, show_default=True, help='Cell size in metres')
@click.option('--binary-out', type=_output_file, default=None, help='Binary map (PGM)')
@click.option('--metrics-out', type=_output_file, default=None, help='IoU JSON')
@click.option('--gt', type=_existing_file, default=None, help='Ground-truth label grid (PGM or f32 raster)')
@click.option('--annotations', type=_existing_file, default=None, help='Annotation JSON to rasterise as ground truth')
@click.option('--ranges', default='100,50,20', show_default=True, help='Evaluation ranges in metres')
@click.option('--params-millions', type=float, default=None, help='Model size for the efficiency score')
@click.pass_context
def pipeline(
    ctx: click.Context,
    calib: Path,
    featmap: Path,
    decoder: Path,
    out: Path,
    strategy: str,
    n_coarse: int,
    k: int,
    no_fine: bool,
    random_coarse: bool,
    points_per_pillar: int,
    z_min: float,
    z_max: float,
    threshold: float,
    side: float,
    resolution: float,
    binary_out: Optional[Path],
    metrics_out: Optional[Path],
    gt: Optional[Path],
    annotations: Optional[Path],
    ranges: str,
    params_millions: Optional[float],
) -> None:
    """
    Run coarse/fine sampling, combine, binarise and (optionally) evaluate.

    With a ground truth (--gt or --annotations) the IoU report is printed as
    JSON on stdout.

    Examples:

        spherebev pipeline --calib calib.json --featmap featmap.fmap \\
            --decoder decoder.json --gt gt.pgm --out logits.f32

        spherebev pipeline ... --strategy dense --out dense.f32
    """
    if gt is not None and annotations is not None:
        raise click.UsageError('Use either --gt or --annotations, not both')
    spec = build_grid(side, resolution)
    eval_ranges = parse_ranges(ranges)

    with exit_on_error('pipeline'):
        cal = codecs.read_calibration(calib)
        fm = codecs.read_feature_map(featmap)
        dec = codecs.read_decoder(decoder)
        ground_truth = None
        if gt is not None:
            ground_truth = codecs.read_label_grid(gt, spec)
            if ground_truth.spec != spec:
                raise ValueError(
                    f"Ground truth grid ({ground_truth.spec.side_meters:g} m / {ground_truth.spec.resolution:g} m) "
                    f"does not match the pipeline grid ({spec.side_meters:g} m / {spec.resolution:g} m)"
                )
        elif annotations is not None:
            ground_truth = rasterize(codecs.read_annotations(annotations), spec)

        sampling = SamplingConfig(
            n_coarse=n_coarse,
            k=k,
            points_per_pillar=points_per_pillar,
            z_min=z_min,
            z_max=z_max,
            fine_enabled=not no_fine,
            random_coarse=random_coarse,
            seed=ctx.obj.get('seed', 0) if ctx.obj else 0,
        )
        state = run_bev_pipeline(
            PipelineState(
                feature_map=fm,
                calibration=cal,
                decoder=dec,
                grid=spec,
                sampling=sampling,
                strategy=SamplingStrategy(strategy),
                threshold=threshold,
                ranges=eval_ranges,
                ground_truth=ground_truth,
            )
        )

        codecs.write_grid(out, state.logits)
        logger.info("Pipeline finished", strategy=strategy, path=str(out))
        if binary_out is not None:
            codecs.write_pgm(binary_out, state.binary)
        console.print(format_summary_table(state.summary(), title='Pipeline'))

        if state.report is not None:
            metrics = state.report.to_percent_dict()
            eff = None
            if params_millions is not None:
                full = (
                    state.report.by_range(spec.side_meters)
                    if spec.side_meters in state.report.ranges
                    else state.report.values[0]
                )
                eff = eff_score(round(full * 100.0, 1), params_millions)
                metrics['eff_score'] = round(eff, 3)
            console.print(format_iou_table(state.report, eff))
            text = to_json(metrics)
            if metrics_out is not None:
                metrics_out.write_text(text + '\n', encoding='utf-8')
            click.echo(text)
