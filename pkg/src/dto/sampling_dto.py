from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.config.config import (
    BACKGROUND_LOGIT,
    DEFAULT_FINE_PATTERN,
    DEFAULT_K,
    DEFAULT_N_COARSE,
    DEFAULT_POINTS_PER_PILLAR,
    DEFAULT_Z_MAX,
    DEFAULT_Z_MIN,
)
from src.dto.bev_dto import GridSpec


class SamplingStrategy(str, Enum):
    COARSE_FINE = "coarse-fine"
    DENSE = "dense"


@dataclass(frozen=True, slots=True)
class FeatureMap:
    """C x H x W image-plane features."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 3 or min(data.shape) < 1:
            raise ValueError(f"Feature map must be C x H x W with positive dims, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Feature map contains non-finite values")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, slots=True)
class PillarSet:
    """Vertical columns of sample points above BEV anchor cells.

    Attributes:
        anchors: (N, 2) int (row, col) cell indices.
        points: (N, points_per_pillar, 3) metric points, z ascending.
    """

    anchors: np.ndarray
    points: np.ndarray
    z_min: float
    z_max: float

    @property
    def points_per_pillar(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.anchors.shape[0]


@dataclass(frozen=True, slots=True)
class FeatureVolume:
    """(N, points_per_pillar, C) features pulled for each anchor, rows by ascending z."""

    anchors: np.ndarray
    data: np.ndarray

    def __len__(self) -> int:
        return self.anchors.shape[0]


@dataclass(frozen=True, slots=True)
class SamplingConfig:
    """Coarse/fine sampling parameters.

    Attributes:
        n_coarse: Target number of coarse anchors; None samples every cell.
        k: Number of highest-logit coarse anchors kept for the fine pass.
        fine_pattern: (drow, dcol) offsets placed around each kept anchor.
        fine_enabled: Run the fine pass at all.
        random_coarse: Pick a seeded random subset instead of a uniform stride.
    """

    n_coarse: int | None = DEFAULT_N_COARSE
    k: int = DEFAULT_K
    fine_pattern: tuple[tuple[int, int], ...] = DEFAULT_FINE_PATTERN
    points_per_pillar: int = DEFAULT_POINTS_PER_PILLAR
    z_min: float = DEFAULT_Z_MIN
    z_max: float = DEFAULT_Z_MAX
    fine_enabled: bool = True
    random_coarse: bool = False
    seed: int = 0
    background_logit: float = BACKGROUND_LOGIT

    def __post_init__(self) -> None:
        if self.n_coarse is not None and self.n_coarse < 1:
            raise ValueError(f"n_coarse must be >= 1, got {self.n_coarse}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.n_coarse is not None and self.k > self.n_coarse:
            raise ValueError(f"k ({self.k}) must not exceed n_coarse ({self.n_coarse})")
        if not self.fine_pattern:
            raise ValueError("fine_pattern must not be empty")
        object.__setattr__(
            self, "fine_pattern", tuple((int(dr), int(dc)) for dr, dc in self.fine_pattern)
        )

    def coarse_count(self, spec: GridSpec) -> int:
        total = spec.cells * spec.cells
        if self.n_coarse is None:
            return total
        if self.n_coarse > total:
            raise ValueError(f"n_coarse ({self.n_coarse}) exceeds the {total} grid cells")
        return self.n_coarse


@dataclass(frozen=True, slots=True)
class SparseLogits:
    """Logits for a subset of cells, identified by row-major flat index (ascending)."""

    spec: GridSpec
    cells: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.cells.shape != self.values.shape:
            raise ValueError(f"cells {self.cells.shape} and values {self.values.shape} differ in shape")

    def __len__(self) -> int:
        return self.cells.shape[0]

    def as_dict(self) -> dict[int, float]:
        return {int(c): float(v) for c, v in zip(self.cells, self.values)}


@dataclass(frozen=True, slots=True)
class CoarseResult:
    logits: SparseLogits
    anchors_kept: np.ndarray = field(repr=False)
