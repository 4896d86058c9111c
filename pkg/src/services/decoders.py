"""Decoders turn a per-anchor feature volume into one logit per anchor.

The learned sparse decoder is outside this package; `AffineMeanPoolDecoder` is the
deterministic stand-in used by the CLI and the end-to-end tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from src.dto.sampling_dto import FeatureVolume


@runtime_checkable
class DecoderInterface(Protocol):
    """Maps an (N, points_per_pillar, C) volume to N logits; must be deterministic."""

    def __call__(self, volume: FeatureVolume) -> np.ndarray: ...


@dataclass(frozen=True, slots=True)
class AffineMeanPoolDecoder:
    """Mean over pillar rows, then logit = weights . pooled + bias."""

    weights: tuple[float, ...]
    bias: float = 0.0

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("Decoder weights must not be empty")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ValueError("Decoder weights and bias must be finite")

    def __call__(self, volume: FeatureVolume) -> np.ndarray:
        data = volume.data
        if len(volume) == 0:
            return np.empty(0, dtype=np.float64)
        if data.shape[2] != len(self.weights):
            raise ValueError(
                f"Decoder expects {len(self.weights)} channels, volume has {data.shape[2]}"
            )
        pooled = data.mean(axis=1)
        # reductions stay within a row
        return (pooled * np.asarray(self.weights)).sum(axis=1) + self.bias
