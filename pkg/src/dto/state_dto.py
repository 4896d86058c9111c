from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from src.config.config import DEFAULT_EVAL_RANGES, DEFAULT_THRESHOLD
from src.dto.bev_dto import BevGrid, GridSpec
from src.dto.camera_dto import CameraCalibration
from src.dto.metrics_dto import IouReport
from src.dto.sampling_dto import (
    CoarseResult,
    FeatureMap,
    SamplingConfig,
    SamplingStrategy,
    SparseLogits,
)


@dataclass(slots=True)
class PipelineState:
    """Everything flowing through the BEV pipeline graph.

    The first block is supplied by the caller; the runnables fill in the rest.
    """

    feature_map: FeatureMap
    calibration: CameraCalibration
    decoder: Any
    grid: GridSpec = field(default_factory=GridSpec)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    strategy: SamplingStrategy = SamplingStrategy.COARSE_FINE
    threshold: float = DEFAULT_THRESHOLD
    ranges: tuple[float, ...] = DEFAULT_EVAL_RANGES
    ground_truth: Optional[BevGrid] = None
    workers: Optional[int] = None

    coarse: Optional[CoarseResult] = None
    fine: Optional[SparseLogits] = None
    logits: Optional[BevGrid] = None
    binary: Optional[BevGrid] = None
    report: Optional[IouReport] = None

    def summary(self) -> dict[str, Any]:
        """Counts describing what the run did, for logs and CLI tables."""
        out: dict[str, Any] = {"strategy": SamplingStrategy(self.strategy).value}
        if self.coarse is not None:
            out["coarse_anchors"] = len(self.coarse.logits)
            out["anchors_kept"] = int(self.coarse.anchors_kept.shape[0])
        if self.fine is not None:
            out["fine_anchors"] = len(self.fine)
            out["fine_points"] = len(self.fine) * self.sampling.points_per_pillar
        if self.binary is not None:
            out["positive_cells"] = int(self.binary.values.sum())
        return out
