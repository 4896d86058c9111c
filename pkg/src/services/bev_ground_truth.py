"""BEV ground-truth rasterisation and multi-task targets from 3D box annotations.

A cell is positive when its centre lies inside the yaw-rotated footprint of a box.
Only the rotation about Z matters; roll, pitch, z-centre and height never change
the grid. The ego vehicle has no box and is not rasterised.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from src.config.config import CENTERNESS_SIGMA
from src.dto.bev_dto import BevGrid, BevTargets, BoundingBox3D, GridSpec, ObjectClass
from src.logging.logging import get_logger

logger = get_logger(__name__)

DEFAULT_CLASS_FILTER = (ObjectClass.VEHICLE,)


def _normalise_filter(class_filter: Iterable[ObjectClass | str] | None) -> frozenset[ObjectClass]:
    if class_filter is None:
        return frozenset(DEFAULT_CLASS_FILTER)
    return frozenset(ObjectClass(c) for c in class_filter)


def footprint_corners(box: BoundingBox3D) -> np.ndarray:
    """The four (x, y) corners of the box footprint, counter-clockwise, shape (4, 2)."""
    cx, cy, _ = box.center
    length, width, _ = box.size
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    local = np.array(
        [[length / 2, width / 2], [-length / 2, width / 2], [-length / 2, -width / 2], [length / 2, -width / 2]]
    )
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([cx, cy])


def footprint_mask(box: BoundingBox3D, spec: GridSpec) -> np.ndarray:
    """Boolean (cells, cells) mask of cell centres inside the box footprint (inclusive)."""
    xs, ys = spec.cell_centers()
    dx = xs - box.center[0]
    dy = ys - box.center[1]
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    along = c * dx + s * dy
    across = -s * dx + c * dy
    return (np.abs(along) <= box.size[0] / 2) & (np.abs(across) <= box.size[1] / 2)


def filter_boxes(
    boxes: Sequence[BoundingBox3D],
    class_filter: Iterable[ObjectClass | str] | None,
    spec: GridSpec | None = None,
) -> list[BoundingBox3D]:
    """Keep boxes of the requested classes, and (given a grid) whose centre is on it."""
    classes = _normalise_filter(class_filter)
    kept = [b for b in boxes if b.class_label in classes]
    if spec is not None:
        half = spec.side_meters / 2
        kept = [b for b in kept if abs(b.center[0]) <= half and abs(b.center[1]) <= half]
    return kept


def rasterize(
    boxes: Sequence[BoundingBox3D],
    spec: GridSpec,
    class_filter: Iterable[ObjectClass | str] | None = None,
) -> BevGrid:
    labels = np.zeros(spec.shape, dtype=np.uint8)
    for box in filter_boxes(boxes, class_filter):
        labels[footprint_mask(box, spec)] = 1
    logger.debug("Rasterised boxes", boxes=len(boxes), positive_cells=int(labels.sum()))
    return BevGrid(spec, labels)


def _peak_center(box: BoundingBox3D, spec: GridSpec) -> tuple[float, float]:
    cell = spec.cell_of(box.center[0], box.center[1])
    if cell is None:
        return box.center[0], box.center[1]
    return spec.cell_center(*cell)


def build_targets(
    boxes: Sequence[BoundingBox3D],
    spec: GridSpec,
    class_filter: Iterable[ObjectClass | str] | None = None,
    sigma: float = CENTERNESS_SIGMA,
) -> BevTargets:
    """Segmentation, centerness and offset targets.

    Centerness is a Gaussian exp(-d^2 / (2 sigma^2)) per box, centred on the cell that
    holds the box centre, combined by maximum. Each positive cell is owned by the
    containing box whose centre is nearest; ties go to the earlier box.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    selected = filter_boxes(boxes, class_filter)
    xs, ys = spec.cell_centers()

    labels = np.zeros(spec.shape, dtype=np.uint8)
    centerness = np.zeros(spec.shape, dtype=np.float64)
    offset = np.full((2,) + spec.shape, np.nan, dtype=np.float64)
    owner_dist = np.full(spec.shape, np.inf, dtype=np.float64)

    for box in selected:
        mask = footprint_mask(box, spec)
        labels[mask] = 1

        px, py = _peak_center(box, spec)
        bump = np.exp(-((xs - px) ** 2 + (ys - py) ** 2) / (2 * sigma**2))
        np.maximum(centerness, bump, out=centerness)

        dx = box.center[0] - xs
        dy = box.center[1] - ys
        dist = np.hypot(dx, dy)
        # strict "<" keeps the earlier box on ties
        owns = mask & (dist < owner_dist)
        owner_dist[owns] = dist[owns]
        offset[0][owns] = dx[owns]
        offset[1][owns] = dy[owns]

    np.clip(centerness, 0.0, 1.0, out=centerness)
    logger.debug("Built BEV targets", boxes=len(selected), positive_cells=int(labels.sum()))
    return BevTargets(
        segmentation=BevGrid(spec, labels),
        centerness=BevGrid(spec, centerness),
        offset=offset,
    )
