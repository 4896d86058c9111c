"""Loss and IoU scoring commands."""
from pathlib import Path
from typing import Optional

import click
import numpy as np
from rich.console import Console

from src.cli.utils.errors import exit_on_error
from src.cli.utils.formatters import format_iou_table, format_loss_table, to_json
from src.cli.utils.validators import parse_ranges, parse_weights
from src.config.config import DEFAULT_THRESHOLD, GAMMA_SWEEP
from src.converter import codecs
from src.dto.bev_dto import BevGrid
from src.dto.loss_dto import FocalConfig
from src.logging.logging import get_logger
from src.services.bev_ground_truth import build_targets
from src.services.losses import focal_gamma_sweep, loss_report, sigmoid
from src.services.metrics import binarize, eff_score, iou_at_ranges

console = Console(stderr=True)
logger = get_logger(__name__)

_existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)


def _same_grid(pred: BevGrid, other: BevGrid, what: str) -> None:
    if pred.spec != other.spec:
        raise ValueError(f"{what} grid does not match the prediction grid")


@click.command()
@click.option('--pred', required=True, type=_existing_file, help='Segmentation prediction (f32 raster)')
@click.option('--target', required=True, type=_existing_file, help='Segmentation target (PGM or f32 raster)')
@click.option('--gamma', type=float, default=2.0, show_default=True, help='Focal exponent')
@click.option('--probabilities', is_flag=True, help='Prediction holds probabilities rather than logits')
@click.option('--center-pred', type=_existing_file, default=None, help='Centerness prediction (f32 raster)')
@click.option('--offset-pred', type=_existing_file, default=None, help='Offset prediction (2-channel f32 raster)')
@click.option('--annotations', type=_existing_file, default=None, help='Boxes for the centerness / offset targets')
@click.option('--weights', default='1,1,1', show_default=True, help='seg,center,offset task weights')
@click.option('--gamma-sweep', is_flag=True, help='Also report the focal loss over the gamma sweep')
def loss(
    pred: Path,
    target: Path,
    gamma: float,
    probabilities: bool,
    center_pred: Optional[Path],
    offset_pred: Optional[Path],
    annotations: Optional[Path],
    weights: str,
    gamma_sweep: bool,
) -> None:
    """
    Compute the multi-task loss of a prediction against its targets.

    Prints a JSON report {seg, center, offset, total}; heads without a
    prediction are null.
    """
    if (center_pred is not None or offset_pred is not None) and annotations is None:
        raise click.UsageError('--center-pred and --offset-pred need --annotations for their targets')
    task_weights = parse_weights(weights)

    with exit_on_error('loss'):
        seg_raw = codecs.read_grid(pred)
        seg_target = codecs.read_label_grid(target, seg_raw.spec)
        _same_grid(seg_raw, seg_target, 'Target')
        probs = np.asarray(seg_raw.values) if probabilities else sigmoid(seg_raw.values)
        cfg = FocalConfig(gamma=gamma)

        center = offset = None
        if annotations is not None:
            targets = build_targets(codecs.read_annotations(annotations), seg_raw.spec)
            if center_pred is not None:
                center_grid = codecs.read_grid(center_pred)
                _same_grid(seg_raw, center_grid, 'Centerness')
                center = (center_grid.values, targets.centerness.values)
            if offset_pred is not None:
                spec, offset_data = codecs.read_raster(offset_pred)
                if spec != seg_raw.spec:
                    raise ValueError('Offset grid does not match the prediction grid')
                offset = (offset_data, targets.offset)

        report = loss_report(probs, seg_target, cfg, center=center, offset=offset, weights=task_weights)
        payload: dict[str, object] = dict(report.to_dict())
        if gamma_sweep:
            sweep = focal_gamma_sweep(probs, seg_target, GAMMA_SWEEP)
            payload['gamma_sweep'] = {f"{g:g}": v for g, v in sweep.items()}
        logger.info("Losses computed", gamma=gamma, total=report.total)
        console.print(format_loss_table(report))
        click.echo(to_json(payload))


@click.command()
@click.option('--pred', required=True, type=_existing_file, help='Logits (f32 raster)')
@click.option('--gt', required=True, type=_existing_file, help='Ground-truth label grid (PGM or f32 raster)')
@click.option('--ranges', default='100,50,20', show_default=True, help='Evaluation ranges in metres')
@click.option('--threshold', type=float, default=DEFAULT_THRESHOLD, show_default=True, help='Logit threshold (strict)')
@click.option('--params-millions', type=float, default=None, help='Model size for the efficiency score')
def evaluate(
    pred: Path,
    gt: Path,
    ranges: str,
    threshold: float,
    params_millions: Optional[float],
) -> None:
    """
    Score binarised logits against a ground truth at several ranges.

    Prints JSON {iou_100, iou_50, iou_20} in percent with one decimal.
    """
    eval_ranges = parse_ranges(ranges)
    with exit_on_error('evaluate'):
        logits = codecs.read_grid(pred)
        truth = codecs.read_label_grid(gt, logits.spec)
        _same_grid(logits, truth, 'Ground truth')
        report = iou_at_ranges(binarize(logits, threshold), truth, eval_ranges)
        metrics: dict[str, float] = report.to_percent_dict()
        eff = None
        if params_millions is not None:
            full = report.by_range(logits.spec.side_meters) if logits.spec.side_meters in report.ranges else report.values[0]
            eff = eff_score(round(full * 100.0, 1), params_millions)
            metrics['eff_score'] = round(eff, 3)
        logger.info("Prediction evaluated", ranges=list(eval_ranges), eff_score=eff)
        console.print(format_iou_table(report, eff))
        click.echo(to_json(metrics))
