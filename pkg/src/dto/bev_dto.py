"""Data structures for bird's-eye-view grids and box annotations.

Grid orientation: +x (forward) maps to row 0 at the front and +y (left) maps to
column 0 at the left. Cell (row, col) therefore has its metric centre at

    x = side/2 - (row + 0.5) * resolution
    y = side/2 - (col + 0.5) * resolution
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from src.config.config import DEFAULT_RESOLUTION, DEFAULT_SIDE_METERS


class ObjectClass(str, Enum):
    VEHICLE = "vehicle"
    PEDESTRIAN = "pedestrian"
    BICYCLE = "bicycle"


@dataclass(frozen=True, slots=True)
class BoundingBox3D:
    center: tuple[float, float, float]
    rotation: tuple[float, float, float]
    size: tuple[float, float, float]
    class_label: ObjectClass = ObjectClass.VEHICLE
    sensor_distance: Optional[float] = None
    point_count: Optional[int] = None

    def __post_init__(self) -> None:
        if len(self.center) != 3 or len(self.rotation) != 3 or len(self.size) != 3:
            raise ValueError("center, rotation and size must each have 3 components")
        if any(not s > 0 for s in self.size):
            raise ValueError(f"Box size components must be > 0, got {self.size}")
        if not isinstance(self.class_label, ObjectClass):
            object.__setattr__(self, "class_label", ObjectClass(self.class_label))

    @property
    def yaw(self) -> float:
        return self.rotation[2]


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Square, ego-centred metric grid."""

    side_meters: float = DEFAULT_SIDE_METERS
    resolution: float = DEFAULT_RESOLUTION

    def __post_init__(self) -> None:
        if not self.side_meters > 0 or not self.resolution > 0:
            raise ValueError(
                f"Grid side and resolution must be > 0, got {self.side_meters} / {self.resolution}"
            )
        ratio = self.side_meters / self.resolution
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(
                f"side_meters / resolution must be an integer, got {self.side_meters} / {self.resolution}"
            )

    @property
    def cells(self) -> int:
        return int(round(self.side_meters / self.resolution))

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells, self.cells

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        half = self.side_meters / 2
        return half - (row + 0.5) * self.resolution, half - (col + 0.5) * self.resolution

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Metric (x, y) of every cell centre as two (cells, cells) arrays."""
        half = self.side_meters / 2
        idx = np.arange(self.cells, dtype=np.float64)
        xs = half - (idx + 0.5) * self.resolution
        ys = half - (idx + 0.5) * self.resolution
        return np.meshgrid(xs, ys, indexing="ij")

    def anchor_centers(self, anchors: np.ndarray) -> np.ndarray:
        """Metric (x, y) for an (N, 2) array of (row, col) indices."""
        anchors = np.asarray(anchors, dtype=np.float64).reshape(-1, 2)
        half = self.side_meters / 2
        return half - (anchors + 0.5) * self.resolution

    def cell_of(self, x: float, y: float) -> Optional[tuple[int, int]]:
        """(row, col) containing the metric point, or None when it lies off-grid."""
        half = self.side_meters / 2
        row = math.floor((half - x) / self.resolution)
        col = math.floor((half - y) / self.resolution)
        if 0 <= row < self.cells and 0 <= col < self.cells:
            return row, col
        return None

    def flat_index(self, anchors: np.ndarray) -> np.ndarray:
        anchors = np.asarray(anchors, dtype=np.int64).reshape(-1, 2)
        return anchors[:, 0] * self.cells + anchors[:, 1]

    def unflatten(self, flat: np.ndarray) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.int64)
        return np.stack([flat // self.cells, flat % self.cells], axis=1)

    def in_bounds(self, anchors: np.ndarray) -> np.ndarray:
        anchors = np.asarray(anchors).reshape(-1, 2)
        return np.all((anchors >= 0) & (anchors < self.cells), axis=1)


@dataclass(frozen=True, slots=True)
class BevGrid:
    """Dense (cells, cells) payload on a grid: {0,1} labels, logits or real targets."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, copy=True)
        if values.shape != self.spec.shape:
            raise ValueError(f"Grid values have shape {values.shape}, expected {self.spec.shape}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def filled(cls, spec: GridSpec, value: float, dtype: type = np.float64) -> BevGrid:
        return cls(spec, np.full(spec.shape, value, dtype=dtype))


@dataclass(frozen=True, slots=True)
class BevTargets:
    """Per-head training targets.

    Attributes:
        segmentation: {0,1} occupancy grid.
        centerness: Gaussian centre likelihood in [0, 1].
        offset: (2, cells, cells) metres from cell centre to owning box centre;
            NaN wherever segmentation is 0.
    """

    segmentation: BevGrid
    centerness: BevGrid
    offset: np.ndarray = field(repr=False)
