from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from src.config.config import SYNC_QUEUE_SIZE, SYNC_REFERENCE, SYNC_SLOP


class StreamId(str, Enum):
    LIDAR = "lidar"
    CAMERA = "camera"
    GNSS = "gnss"


# Tie order when several streams share one timestamp.
STREAM_ORDER = (StreamId.LIDAR, StreamId.CAMERA, StreamId.GNSS)


@dataclass(frozen=True, slots=True)
class StampedMessage:
    stream_id: StreamId
    timestamp: float
    payload_ref: Optional[str] = None


@dataclass(frozen=True, slots=True)
class SyncConfig:
    reference: StreamId = StreamId(SYNC_REFERENCE)
    queue_size: int = SYNC_QUEUE_SIZE
    slop: float = SYNC_SLOP
    streams: tuple[StreamId, ...] = STREAM_ORDER

    def __post_init__(self) -> None:
        object.__setattr__(self, "reference", StreamId(self.reference))
        object.__setattr__(self, "streams", tuple(StreamId(s) for s in self.streams))
        if self.queue_size < 1:
            raise ValueError(f"queue_size must be >= 1, got {self.queue_size}")
        if not self.slop >= 0:
            raise ValueError(f"slop must be >= 0, got {self.slop}")
        if self.reference not in self.streams:
            raise ValueError(f"Reference stream {self.reference.value} is not a participating stream")


@dataclass(frozen=True, slots=True)
class SyncedFrame:
    frame_time: float
    members: dict[StreamId, StampedMessage] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class SyncStats:
    reference_count: int
    frames_emitted: int
    match_rate: float
    mean_abs_dt: dict[StreamId, float]

    def to_dict(self) -> dict[str, object]:
        return {
            "reference_count": self.reference_count,
            "frames_emitted": self.frames_emitted,
            "match_rate": self.match_rate,
            "mean_abs_dt": {s.value: dt for s, dt in self.mean_abs_dt.items()},
        }
