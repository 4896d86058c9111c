from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True, slots=True)
class FocalConfig:
    """Focal-loss settings; gamma = 0 reduces to binary cross-entropy."""

    gamma: float = 2.0

    def __post_init__(self) -> None:
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True, slots=True)
class LossReport:
    seg: float
    center: Optional[float]
    offset: Optional[float]
    total: float

    def to_dict(self) -> dict[str, Optional[float]]:
        return {"seg": self.seg, "center": self.center, "offset": self.offset, "total": self.total}
