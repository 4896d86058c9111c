from __future__ import annotations

from dataclasses import dataclass


def range_key(range_meters: float) -> str:
    return f"iou_{range_meters:g}"


@dataclass(frozen=True, slots=True)
class IouReport:
    """IoU per evaluation range (fractions in [0, 1])."""

    ranges: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.ranges) != len(self.values):
            raise ValueError("IouReport needs one value per range")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ValueError(f"IoU values must lie in [0, 1], got {self.values}")

    def by_range(self, range_meters: float) -> float:
        for r, v in zip(self.ranges, self.values):
            if r == range_meters:
                return v
        raise KeyError(f"No IoU computed for range {range_meters:g} m")

    @property
    def iou_100(self) -> float:
        return self.by_range(100.0)

    @property
    def iou_50(self) -> float:
        return self.by_range(50.0)

    @property
    def iou_20(self) -> float:
        return self.by_range(20.0)

    def to_percent_dict(self) -> dict[str, float]:
        """Percentages rounded to one decimal, the way result tables print them."""
        return {range_key(r): round(v * 100.0, 1) for r, v in zip(self.ranges, self.values)}
