"""Feature pulling and coarse-to-fine BEV sampling.

Feature pulling stands a pillar of evenly spaced 3D points on each BEV anchor cell,
projects every point into the spherical feature map and samples it bilinearly. The
coarse pass pulls features for a sparse set of anchors and keeps the k highest
logits; the fine pass pulls again on a neighbourhood around those anchors; combine
scatters both onto a dense grid with fine logits taking precedence.

Per-anchor work runs in contiguous chunks on a thread pool capped by
SPHEREBEV_THREADS. Chunks are concatenated in input order and no reduction crosses
anchors, so results do not depend on the worker count.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from src.config.config import BACKGROUND_LOGIT
from src.dto.bev_dto import BevGrid, GridSpec
from src.dto.camera_dto import CameraCalibration
from src.dto.sampling_dto import (
    CoarseResult,
    FeatureMap,
    FeatureVolume,
    PillarSet,
    SamplingConfig,
    SparseLogits,
)
from src.logging.logging import get_logger
from src.services.decoders import DecoderInterface
from src.services.sphere_projection import project_array
from src.utils.parallel import ordered_chunk_map

logger = get_logger(__name__)


def select_coarse_anchors(cfg: SamplingConfig, spec: GridSpec) -> np.ndarray:
    """Coarse anchor cells as an (N, 2) array in row-major order.

    A uniform stride s = floor(sqrt(cells^2 / n_coarse)) is used, which yields at
    least n_coarse anchors. With `random_coarse` a seeded subset of exactly
    n_coarse cells is drawn instead.
    """
    total = spec.cells * spec.cells
    n = cfg.coarse_count(spec)
    if n == total:
        return spec.unflatten(np.arange(total))
    if cfg.random_coarse:
        rng = np.random.default_rng(cfg.seed)
        return spec.unflatten(np.sort(rng.choice(total, size=n, replace=False)))
    stride = max(1, math.isqrt(total // n))
    idx = np.arange(0, spec.cells, stride)
    rows, cols = np.meshgrid(idx, idx, indexing="ij")
    return np.stack([rows.ravel(), cols.ravel()], axis=1)


def make_pillars(anchors: np.ndarray, cfg: SamplingConfig, spec: GridSpec) -> PillarSet:
    if cfg.points_per_pillar < 2:
        raise ValueError(f"points_per_pillar must be >= 2, got {cfg.points_per_pillar}")
    if not cfg.z_max > cfg.z_min:
        raise ValueError(f"z_max must exceed z_min, got [{cfg.z_min}, {cfg.z_max}]")
    anchors = np.asarray(anchors, dtype=np.int64).reshape(-1, 2)
    if not np.all(spec.in_bounds(anchors)):
        raise ValueError("Anchors must be valid cell indices of the grid")

    centers = spec.anchor_centers(anchors)
    z = np.linspace(cfg.z_min, cfg.z_max, cfg.points_per_pillar)
    points = np.empty((anchors.shape[0], cfg.points_per_pillar, 3), dtype=np.float64)
    points[:, :, 0] = centers[:, 0, None]
    points[:, :, 1] = centers[:, 1, None]
    points[:, :, 2] = z[None, :]
    return PillarSet(anchors=anchors, points=points, z_min=cfg.z_min, z_max=cfg.z_max)


def bilinear_sample_many(fm: FeatureMap, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Bilinear samples at N continuous (u, v) coordinates, shape (N, C).

    Coordinates are clamped to [0, W-1] x [0, H-1] before the neighbour lookup.
    """
    u = np.clip(np.asarray(us, dtype=np.float64), 0.0, fm.width - 1)
    v = np.clip(np.asarray(vs, dtype=np.float64), 0.0, fm.height - 1)
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    u1 = np.minimum(u0 + 1, fm.width - 1)
    v1 = np.minimum(v0 + 1, fm.height - 1)
    du = u - u0
    dv = v - v0

    data = fm.data
    f00 = data[:, v0, u0]
    f01 = data[:, v0, u1]
    f10 = data[:, v1, u0]
    f11 = data[:, v1, u1]
    out = (
        f00 * ((1.0 - du) * (1.0 - dv))
        + f01 * (du * (1.0 - dv))
        + f10 * ((1.0 - du) * dv)
        + f11 * (du * dv)
    )
    return out.T


def bilinear_sample(fm: FeatureMap, u: float, v: float) -> np.ndarray:
    return bilinear_sample_many(fm, np.array([u]), np.array([v]))[0]


def pull_features(
    pillars: PillarSet,
    fm: FeatureMap,
    cal: CameraCalibration,
    workers: Optional[int] = None,
) -> FeatureVolume:
    """Project every pillar point and sample the feature map there.

    Calibration pixel coordinates are rescaled by (W_fm / W_cal, H_fm / H_cal) so
    downsampled backbone maps line up with the calibrated image.
    """
    n, p = len(pillars), pillars.points_per_pillar
    if n == 0:
        return FeatureVolume(anchors=pillars.anchors, data=np.empty((0, p, fm.channels)))
    scale_u = fm.width / cal.width
    scale_v = fm.height / cal.height

    def pull_chunk(start: int, stop: int) -> np.ndarray:
        pts = pillars.points[start:stop].reshape(-1, 3)
        uv = project_array(pts, cal)
        samples = bilinear_sample_many(fm, uv[:, 0] * scale_u, uv[:, 1] * scale_v)
        return samples.reshape(stop - start, p, fm.channels)

    chunks = ordered_chunk_map(pull_chunk, n, workers=workers)
    return FeatureVolume(anchors=pillars.anchors, data=np.concatenate(chunks, axis=0))


def evaluate_anchors(
    anchors: np.ndarray,
    fm: FeatureMap,
    cal: CameraCalibration,
    cfg: SamplingConfig,
    spec: GridSpec,
    decoder: DecoderInterface,
    workers: Optional[int] = None,
) -> SparseLogits:
    """Pull and decode a set of anchors; duplicates collapse, output is row-major."""
    flat = np.unique(spec.flat_index(anchors))
    anchors = spec.unflatten(flat)
    volume = pull_features(make_pillars(anchors, cfg, spec), fm, cal, workers=workers)
    logits = np.asarray(decoder(volume), dtype=np.float64)
    if logits.shape != (len(anchors),):
        raise ValueError(f"Decoder returned shape {logits.shape}, expected ({len(anchors)},)")
    return SparseLogits(spec=spec, cells=flat, values=logits)


def top_k_cells(logits: SparseLogits, k: int) -> np.ndarray:
    """The k highest-logit cells as (k, 2); ties go to the lower row-major index."""
    if k > len(logits):
        raise ValueError(f"k ({k}) exceeds the number of coarse anchors ({len(logits)})")
    order = np.lexsort((logits.cells, -logits.values))
    return logits.spec.unflatten(logits.cells[order[:k]])


def coarse_pass(
    fm: FeatureMap,
    cal: CameraCalibration,
    cfg: SamplingConfig,
    spec: GridSpec,
    decoder: DecoderInterface,
    anchors: Optional[np.ndarray] = None,
    workers: Optional[int] = None,
) -> CoarseResult:
    if anchors is None:
        anchors = select_coarse_anchors(cfg, spec)
    if cfg.k > len(np.unique(spec.flat_index(anchors))):
        raise ValueError(f"k ({cfg.k}) exceeds the number of coarse anchors ({len(anchors)})")
    logits = evaluate_anchors(anchors, fm, cal, cfg, spec, decoder, workers=workers)
    kept = top_k_cells(logits, cfg.k)
    logger.info("Coarse pass done", anchors=len(logits), kept=len(kept))
    return CoarseResult(logits=logits, anchors_kept=kept)


def fine_anchor_set(
    anchors_kept: np.ndarray, pattern: tuple[tuple[int, int], ...], spec: GridSpec
) -> np.ndarray:
    """Union of anchor + offset over the pattern, off-grid cells dropped, row-major unique."""
    anchors_kept = np.asarray(anchors_kept, dtype=np.int64).reshape(-1, 2)
    offsets = np.asarray(pattern, dtype=np.int64).reshape(-1, 2)
    candidates = (anchors_kept[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    candidates = candidates[spec.in_bounds(candidates)]
    return spec.unflatten(np.unique(spec.flat_index(candidates)))


def fine_pass(
    anchors_kept: np.ndarray,
    fm: FeatureMap,
    cal: CameraCalibration,
    cfg: SamplingConfig,
    spec: GridSpec,
    decoder: DecoderInterface,
    workers: Optional[int] = None,
) -> SparseLogits:
    anchors_kept = np.asarray(anchors_kept, dtype=np.int64).reshape(-1, 2)
    if not np.all(spec.in_bounds(anchors_kept)):
        raise ValueError("Kept anchors must be valid cell indices of the grid")
    fine = fine_anchor_set(anchors_kept, cfg.fine_pattern, spec)
    logits = evaluate_anchors(fine, fm, cal, cfg, spec, decoder, workers=workers)
    logger.info(
        "Fine pass done",
        kept=len(anchors_kept),
        fine_anchors=len(fine),
        fine_points=len(fine) * cfg.points_per_pillar,
    )
    return logits


def combine(
    coarse_logits: SparseLogits,
    fine_logits: Optional[SparseLogits],
    fill: float = BACKGROUND_LOGIT,
) -> BevGrid:
    """Dense logits: fine where present, else coarse, else the background fill."""
    spec = coarse_logits.spec
    if fine_logits is not None and fine_logits.spec != spec:
        raise ValueError("Coarse and fine logits must share one grid spec")
    dense = np.full(spec.cells * spec.cells, fill, dtype=np.float64)
    dense[coarse_logits.cells] = coarse_logits.values
    if fine_logits is not None:
        dense[fine_logits.cells] = fine_logits.values
    return BevGrid(spec, dense.reshape(spec.shape))


def dense_pass(
    fm: FeatureMap,
    cal: CameraCalibration,
    cfg: SamplingConfig,
    spec: GridSpec,
    decoder: DecoderInterface,
    workers: Optional[int] = None,
) -> BevGrid:
    """Single pass over every cell of the grid."""
    all_cells = spec.unflatten(np.arange(spec.cells * spec.cells))
    logits = evaluate_anchors(all_cells, fm, cal, cfg, spec, decoder, workers=workers)
    logger.info("Dense pass done", anchors=len(logits))
    return BevGrid(spec, logits.values.reshape(spec.shape))
