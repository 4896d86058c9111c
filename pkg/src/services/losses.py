"""Multi-task losses: focal loss for segmentation, balanced MSE for centerness and
absolute error for offsets.

Focal loss scales cross-entropy by (1 - p_t)^gamma so that well-classified cells
contribute little:

    FL(p_t) = -(1 - p_t)^gamma * log(p_t),   p_t = p if y = 1 else 1 - p

p_t is clamped to [FOCAL_CLAMP, 1 - FOCAL_CLAMP] before the logarithm. All grid
losses are means over cells so magnitudes do not depend on grid size.
"""
from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from src.config.config import FOCAL_CLAMP, GAMMA_SWEEP
from src.dto.bev_dto import BevGrid
from src.dto.loss_dto import FocalConfig, LossReport


def _check_probabilities(p: np.ndarray) -> None:
    if np.any(~((p >= 0.0) & (p <= 1.0))):
        raise ValueError("Probabilities must lie in [0, 1]")


def _check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"Shape mismatch: {sorted(shapes)}")


def _values(grid: BevGrid | np.ndarray) -> np.ndarray:
    return np.asarray(grid.values if isinstance(grid, BevGrid) else grid, dtype=np.float64)


def sigmoid(logits: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    x = np.asarray(logits, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def p_t(p: float | np.ndarray, y: int | np.ndarray) -> float | np.ndarray:
    """Probability assigned to the true class."""
    p_arr = np.asarray(p, dtype=np.float64)
    _check_probabilities(p_arr)
    out = np.where(np.asarray(y) == 1, p_arr, 1.0 - p_arr)
    return float(out) if out.ndim == 0 else out


def focal_loss(
    p: float | np.ndarray, y: int | np.ndarray, cfg: FocalConfig
) -> float | np.ndarray:
    pt = np.clip(np.asarray(p_t(p, y)), FOCAL_CLAMP, 1.0 - FOCAL_CLAMP)
    out = -((1.0 - pt) ** cfg.gamma) * np.log(pt)
    return float(out) if out.ndim == 0 else out


def focal_loss_grad(
    p: float | np.ndarray, y: int | np.ndarray, cfg: FocalConfig
) -> float | np.ndarray:
    """Analytic dFL/dp; zero where p_t sits on a clamp bound."""
    p_arr = np.asarray(p, dtype=np.float64)
    y_arr = np.asarray(y)
    raw = np.asarray(p_t(p_arr, y_arr))
    pt = np.clip(raw, FOCAL_CLAMP, 1.0 - FOCAL_CLAMP)
    gamma = cfg.gamma
    q = 1.0 - pt
    if gamma == 0:
        d_dpt = -1.0 / pt
    else:
        d_dpt = gamma * q ** (gamma - 1.0) * np.log(pt) - q**gamma / pt
    sign = np.where(y_arr == 1, 1.0, -1.0)
    clamped = (raw < FOCAL_CLAMP) | (raw > 1.0 - FOCAL_CLAMP)
    out = np.where(clamped, 0.0, sign * d_dpt)
    return float(out) if out.ndim == 0 else out


def focal_loss_grid(pred: BevGrid | np.ndarray, target: BevGrid | np.ndarray, cfg: FocalConfig) -> float:
    """Mean per-cell focal loss of a probability grid against {0,1} labels."""
    p, y = _values(pred), _values(target)
    _check_same_shape(p, y)
    if p.size == 0:
        return 0.0
    return float(np.mean(focal_loss(p, y.astype(np.int64), cfg)))


def focal_gamma_sweep(
    pred: BevGrid | np.ndarray,
    target: BevGrid | np.ndarray,
    gammas: Iterable[float] = GAMMA_SWEEP,
) -> dict[float, float]:
    return {float(g): focal_loss_grid(pred, target, FocalConfig(gamma=g)) for g in gammas}


def centerness_loss(
    pred: BevGrid | np.ndarray, target: BevGrid | np.ndarray, fg_mask: BevGrid | np.ndarray
) -> float:
    """Balanced MSE: foreground and background squared errors averaged separately
    and weighted 0.5 each; an empty partition contributes 0."""
    p, t, m = _values(pred), _values(target), _values(fg_mask)
    _check_same_shape(p, t, m)
    sq = (p - t) ** 2
    fg = m > 0
    fg_term = float(sq[fg].mean()) if fg.any() else 0.0
    bg_term = float(sq[~fg].mean()) if (~fg).any() else 0.0
    return 0.5 * fg_term + 0.5 * bg_term


def offset_loss(pred: np.ndarray, target: np.ndarray, fg_mask: BevGrid | np.ndarray) -> float:
    """Mean over foreground cells of |dx| + |dy|; 0 without foreground.

    pred and target are (2, H, W) vector fields; background values are ignored.
    """
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    m = _values(fg_mask)
    _check_same_shape(p, t)
    if p.ndim != 3 or p.shape[0] != 2 or p.shape[1:] != m.shape:
        raise ValueError(f"Offset fields must be (2, {m.shape[0]}, {m.shape[1]}), got {p.shape}")
    fg = m > 0
    if not fg.any():
        return 0.0
    err = np.abs(p[:, fg] - t[:, fg]).sum(axis=0)
    return float(err.mean())


def multi_task_loss(
    seg_l: float,
    center_l: float,
    offset_l: float,
    weights: Sequence[float] = (1.0, 1.0, 1.0),
) -> float:
    if len(weights) != 3:
        raise ValueError(f"Expected 3 task weights, got {len(weights)}")
    if any(not w > 0 for w in weights):
        raise ValueError(f"Task weights must be > 0, got {tuple(weights)}")
    losses = (seg_l, center_l, offset_l)
    if not all(np.isfinite(losses)):
        raise ValueError(f"Losses must be finite, got {losses}")
    return float(sum(w * l for w, l in zip(weights, losses)))


def loss_report(
    seg_pred: BevGrid | np.ndarray,
    seg_target: BevGrid | np.ndarray,
    cfg: FocalConfig,
    center: Optional[tuple[np.ndarray, np.ndarray]] = None,
    offset: Optional[tuple[np.ndarray, np.ndarray]] = None,
    weights: Sequence[float] = (1.0, 1.0, 1.0),
) -> LossReport:
    """Per-head losses and their weighted total over the heads that were supplied.

    `center` and `offset` are (prediction, target) pairs; the segmentation target is
    the foreground mask for both.
    """
    seg = focal_loss_grid(seg_pred, seg_target, cfg)
    center_l = centerness_loss(center[0], center[1], seg_target) if center is not None else None
    offset_l = offset_loss(offset[0], offset[1], seg_target) if offset is not None else None
    total = multi_task_loss(seg, center_l or 0.0, offset_l or 0.0, weights)
    return LossReport(seg=seg, center=center_l, offset=offset_l, total=total)
