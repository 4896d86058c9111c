from __future__ import annotations

from dataclasses import dataclass, field

from src.dto.bev_dto import GridSpec
from src.dto.camera_dto import CameraCalibration


@dataclass(frozen=True, slots=True)
class SceneSpec:
    """Recipe for a synthetic scene; identical specs give identical bytes."""

    seed: int = 0
    n_boxes: int = 5
    length_range: tuple[float, float] = (3.5, 5.0)
    width_range: tuple[float, float] = (1.6, 2.2)
    height_range: tuple[float, float] = (1.4, 2.0)
    placement_half_extent: float = 45.0
    channels: int = 4
    fm_height: int = 64
    fm_width: int = 128
    calibration: CameraCalibration = field(default_factory=CameraCalibration)
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self) -> None:
        if self.n_boxes < 0:
            raise ValueError(f"n_boxes must be >= 0, got {self.n_boxes}")
        for name in ("length_range", "width_range", "height_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < low <= high, got ({lo}, {hi})")
        if self.channels < 2:
            raise ValueError(f"Scene feature maps need at least 2 channels, got {self.channels}")
        if self.fm_height < 1 or self.fm_width < 1:
            raise ValueError("Feature map dimensions must be positive")
