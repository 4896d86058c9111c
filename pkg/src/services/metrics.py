"""Range-cropped IoU and the parameter-efficiency score.

"Range R" means the centred R x R metre window of the grid, so IoU at the full side
length is the full-map IoU. Two empty sets agree perfectly (IoU 1.0).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.config.config import DEFAULT_EVAL_RANGES, DEFAULT_THRESHOLD
from src.dto.bev_dto import BevGrid, GridSpec
from src.dto.metrics_dto import IouReport
from src.logging.logging import get_logger

logger = get_logger(__name__)


def _binary(grid: BevGrid | np.ndarray) -> np.ndarray:
    values = grid.values if isinstance(grid, BevGrid) else np.asarray(grid)
    return values.astype(bool)


def _counts(pred: np.ndarray, gt: np.ndarray) -> tuple[int, int]:
    if pred.shape != gt.shape:
        raise ValueError(f"Shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    return int(np.count_nonzero(pred & gt)), int(np.count_nonzero(pred | gt))


def _ratio(intersection: int, union: int) -> float:
    return 1.0 if union == 0 else intersection / union


def iou(pred: BevGrid | np.ndarray, gt: BevGrid | np.ndarray) -> float:
    return _ratio(*_counts(_binary(pred), _binary(gt)))


def crop_slice(spec: GridSpec, range_meters: float) -> slice:
    """Index slice of the centred window covering range_meters on each side."""
    if not 0 < range_meters <= spec.side_meters:
        raise ValueError(f"Range {range_meters:g} m must lie in (0, {spec.side_meters:g}] m")
    ratio = range_meters / spec.resolution
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(
            f"Range {range_meters:g} m is not a whole number of {spec.resolution:g} m cells"
        )
    if (spec.cells - n) % 2:
        raise ValueError(f"A {n}-cell window cannot be centred on a {spec.cells}-cell grid")
    start = (spec.cells - n) // 2
    return slice(start, start + n)


def iou_at_ranges(
    pred: BevGrid, gt: BevGrid, ranges: Sequence[float] = DEFAULT_EVAL_RANGES
) -> IouReport:
    if pred.spec != gt.spec:
        raise ValueError("Prediction and ground truth must share one grid spec")
    p, g = _binary(pred), _binary(gt)
    values = []
    for r in ranges:
        window = crop_slice(pred.spec, r)
        values.append(iou(p[window, window], g[window, window]))
    return IouReport(ranges=tuple(float(r) for r in ranges), values=tuple(values))


def eff_score(iou_100_percent: float, params_millions: float) -> float:
    """IoU percentage per million model parameters."""
    if not params_millions > 0:
        raise ValueError(f"Parameter count must be > 0, got {params_millions}")
    return iou_100_percent / params_millions


def binarize(logits: BevGrid, threshold: float = DEFAULT_THRESHOLD) -> BevGrid:
    """1 where logit > threshold (strict), else 0."""
    return BevGrid(logits.spec, (logits.values > threshold).astype(np.uint8))


@dataclass(slots=True)
class IouAccumulator:
    """Dataset-level IoU: intersections and unions summed over frames per range."""

    spec: GridSpec
    ranges: tuple[float, ...] = DEFAULT_EVAL_RANGES
    intersections: dict[float, int] = field(default_factory=dict)
    unions: dict[float, int] = field(default_factory=dict)
    frames: int = 0

    def __post_init__(self) -> None:
        for r in self.ranges:
            crop_slice(self.spec, r)
            self.intersections.setdefault(r, 0)
            self.unions.setdefault(r, 0)

    def update(self, pred: BevGrid, gt: BevGrid) -> None:
        if pred.spec != self.spec or gt.spec != self.spec:
            raise ValueError("Frame grids must match the accumulator grid spec")
        p, g = _binary(pred), _binary(gt)
        for r in self.ranges:
            window = crop_slice(self.spec, r)
            inter, union = _counts(p[window, window], g[window, window])
            self.intersections[r] += inter
            self.unions[r] += union
        self.frames += 1

    def report(self) -> IouReport:
        values = tuple(_ratio(self.intersections[r], self.unions[r]) for r in self.ranges)
        logger.debug("IoU accumulated", frames=self.frames, values=values)
        return IouReport(ranges=tuple(float(r) for r in self.ranges), values=values)
