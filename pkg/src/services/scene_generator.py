"""Synthetic scenes for end-to-end desk-scale runs.

Boxes are dropped uniformly within the placement square with random size and yaw,
kept apart so their footprints never touch. The feature map is built from the
rasterised ground truth: every positive cell's pillar is projected into the map, the
hit texels are marked and the indicator is smoothed. Channel 1 is a constant bias
channel and any further channels carry seeded low-amplitude noise.

With the matching decoder, box cells decode high and open road decodes low. Cells
behind a box along the same camera rays see the same texels and decode high as
well; a pure image-plane map carries no depth, so the recovered map over-covers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from src.config.config import DEFAULT_POINTS_PER_PILLAR, DEFAULT_Z_MAX, DEFAULT_Z_MIN
from src.converter import codecs
from src.dto.bev_dto import BevGrid, BoundingBox3D, ObjectClass
from src.dto.camera_dto import CameraCalibration
from src.dto.sampling_dto import FeatureMap
from src.dto.scene_dto import SceneSpec
from src.logging.logging import get_logger
from src.services.bev_ground_truth import rasterize
from src.services.decoders import AffineMeanPoolDecoder
from src.services.sphere_projection import project_array

logger = get_logger(__name__)

MAX_PLACEMENT_ATTEMPTS = 1000
INDICATOR_SMOOTHING = 1.0
NOISE_AMPLITUDE = 0.05
# mean-pooled indicator above ~0.3 decodes positive
DECODER_GAIN = 10.0
DECODER_BIAS = -3.0

SCENE_FILES = {
    "annotations": "annotations.json",
    "featmap": "featmap.fmap",
    "calibration": "calib.json",
    "decoder": "decoder.json",
    "gt": "gt.pgm",
}


@dataclass(frozen=True, slots=True)
class GeneratedScene:
    spec: SceneSpec
    boxes: tuple[BoundingBox3D, ...]
    feature_map: FeatureMap
    decoder: AffineMeanPoolDecoder
    ground_truth: BevGrid

    @property
    def calibration(self) -> CameraCalibration:
        return self.spec.calibration


def _place_boxes(spec: SceneSpec, rng: np.random.Generator) -> list[BoundingBox3D]:
    margin = 2.0 * spec.grid.resolution * math.sqrt(2.0)
    boxes: list[BoundingBox3D] = []
    for _ in range(spec.n_boxes):
        for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
            x, y = rng.uniform(-spec.placement_half_extent, spec.placement_half_extent, size=2)
            length = rng.uniform(*spec.length_range)
            width = rng.uniform(*spec.width_range)
            height = rng.uniform(*spec.height_range)
            yaw = rng.uniform(-math.pi, math.pi)
            reach = math.hypot(length, width) / 2
            if all(
                math.hypot(x - b.center[0], y - b.center[1])
                > reach + math.hypot(b.size[0], b.size[1]) / 2 + margin
                for b in boxes
            ):
                break
        else:
            raise ValueError(
                f"Could not place {spec.n_boxes} disjoint boxes within ±{spec.placement_half_extent} m"
            )
        z = height / 2 + DEFAULT_Z_MIN
        boxes.append(
            BoundingBox3D(
                center=(float(x), float(y), float(z)),
                rotation=(0.0, 0.0, float(yaw)),
                size=(float(length), float(width), float(height)),
                class_label=ObjectClass.VEHICLE,
                sensor_distance=round(math.sqrt(x * x + y * y + z * z), 3),
                point_count=int(rng.integers(20, 2000)),
            )
        )
    return boxes


def _indicator_map(gt: BevGrid, spec: SceneSpec) -> np.ndarray:
    cal = spec.calibration
    indicator = np.zeros((spec.fm_height, spec.fm_width), dtype=np.float64)
    positives = np.argwhere(gt.values > 0)
    if positives.size == 0:
        return indicator
    centers = spec.grid.anchor_centers(positives)
    z = np.linspace(DEFAULT_Z_MIN, DEFAULT_Z_MAX, DEFAULT_POINTS_PER_PILLAR)
    points = np.empty((len(centers), len(z), 3), dtype=np.float64)
    points[:, :, 0] = centers[:, 0, None]
    points[:, :, 1] = centers[:, 1, None]
    points[:, :, 2] = z[None, :]
    uv = project_array(points.reshape(-1, 3), cal)
    cols = np.clip(np.rint(uv[:, 0] * spec.fm_width / cal.width), 0, spec.fm_width - 1).astype(np.int64)
    rows = np.clip(np.rint(uv[:, 1] * spec.fm_height / cal.height), 0, spec.fm_height - 1).astype(np.int64)
    indicator[rows, cols] = 1.0
    smoothed = ndimage.gaussian_filter(indicator, sigma=INDICATOR_SMOOTHING, mode="nearest")
    peak = smoothed.max()
    return smoothed / peak if peak > 0 else smoothed


def generate_scene(spec: SceneSpec) -> GeneratedScene:
    rng = np.random.default_rng(spec.seed)
    boxes = _place_boxes(spec, rng)
    gt = rasterize(boxes, spec.grid)

    data = np.empty((spec.channels, spec.fm_height, spec.fm_width), dtype=np.float64)
    data[0] = _indicator_map(gt, spec)
    data[1] = 1.0
    if spec.channels > 2:
        data[2:] = NOISE_AMPLITUDE * rng.standard_normal((spec.channels - 2, spec.fm_height, spec.fm_width))
    # what goes to disk is float32, so keep the in-memory map identical to a re-read
    fm = FeatureMap(data.astype(np.float32).astype(np.float64))

    weights = (DECODER_GAIN, DECODER_BIAS) + (0.0,) * (spec.channels - 2)
    decoder = AffineMeanPoolDecoder(weights=weights, bias=0.0)
    logger.info("Generated scene", seed=spec.seed, boxes=len(boxes), positive_cells=int(gt.values.sum()))
    return GeneratedScene(spec=spec, boxes=tuple(boxes), feature_map=fm, decoder=decoder, ground_truth=gt)


def write_scene(scene: GeneratedScene, directory: str | Path) -> dict[str, Path]:
    """Write every scene artifact into directory; returns the paths by role."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {role: out / name for role, name in SCENE_FILES.items()}
    codecs.write_annotations(paths["annotations"], scene.boxes)
    codecs.write_feature_map(paths["featmap"], scene.feature_map)
    codecs.write_calibration(paths["calibration"], scene.calibration)
    codecs.write_decoder(paths["decoder"], scene.decoder)
    codecs.write_pgm(paths["gt"], scene.ground_truth)
    return paths
