"""Approximate-time synchronisation of multi-rate sensor streams.

Matching is anchored on a reference stream (LiDAR by default). A stream's pick for a
queued reference message is settled once that stream holds a message at or after the
reference time: nothing arriving later can be nearer. When every other stream is
settled with a candidate within `slop` seconds, a frame is emitted with the nearest
candidate of each stream (ties go to the earlier message). A reference that some
settled stream cannot match is skipped; an unsettled one holds back later references.
The consumed messages and everything older in their queues are dropped, so no message
is reused and frame times only increase. Queues hold at most `queue_size` messages;
the oldest is evicted first.

A Synchronizer is a single-owner object: calls to push must be serialised.
"""
from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Mapping, Optional

import numpy as np

from src.dto.sync_dto import (
    STREAM_ORDER,
    StampedMessage,
    StreamId,
    SyncConfig,
    SyncedFrame,
    SyncStats,
)
from src.logging.logging import get_logger

logger = get_logger(__name__)


class OutOfOrderError(ValueError):
    """A message is not newer than the previous message of its stream."""


class Synchronizer:
    def __init__(self, cfg: SyncConfig | None = None) -> None:
        self.cfg = cfg or SyncConfig()
        self._queues: dict[StreamId, deque[StampedMessage]] = {s: deque() for s in self.cfg.streams}
        self._last_seen: dict[StreamId, float] = {}
        self._others = [s for s in self.cfg.streams if s != self.cfg.reference]
        self.reference_count = 0
        self.frames_emitted = 0

    def queue_lengths(self) -> dict[StreamId, int]:
        return {s: len(q) for s, q in self._queues.items()}

    def push(self, msg: StampedMessage) -> list[SyncedFrame]:
        stream = StreamId(msg.stream_id)
        if stream not in self._queues:
            raise ValueError(f"Stream {stream.value} is not part of this synchronizer")
        last = self._last_seen.get(stream)
        if last is not None and not msg.timestamp > last:
            raise OutOfOrderError(
                f"{stream.value} timestamp {msg.timestamp!r} does not follow {last!r}"
            )
        self._last_seen[stream] = msg.timestamp

        queue = self._queues[stream]
        queue.append(msg)
        if len(queue) > self.cfg.queue_size:
            evicted = queue.popleft()
            logger.debug("Evicted message", stream=stream.value, timestamp=evicted.timestamp)
        if stream == self.cfg.reference:
            self.reference_count += 1
        return self._drain()

    def _nearest(self, stream: StreamId, t: float) -> Optional[int]:
        best, best_dt = None, math.inf
        for i, candidate in enumerate(self._queues[stream]):
            dt = abs(candidate.timestamp - t)
            if dt <= self.cfg.slop and dt < best_dt:
                best, best_dt = i, dt
        return best

    def _settled(self, stream: StreamId, t: float) -> bool:
        queue = self._queues[stream]
        return bool(queue) and queue[-1].timestamp >= t

    def _drain(self) -> list[SyncedFrame]:
        frames: list[SyncedFrame] = []
        ref_queue = self._queues[self.cfg.reference]
        i = 0
        while i < len(ref_queue):
            ref = ref_queue[i]
            picks = {s: self._nearest(s, ref.timestamp) for s in self._others}
            settled = {s: self._settled(s, ref.timestamp) for s in self._others}
            if any(settled[s] and idx is None for s, idx in picks.items()):
                i += 1
                continue
            if not all(settled.values()):
                break

            members = {self.cfg.reference: ref}
            for _ in range(i + 1):
                ref_queue.popleft()
            for s, idx in picks.items():
                queue = self._queues[s]
                for _ in range(idx):
                    queue.popleft()
                members[s] = queue.popleft()
            frames.append(SyncedFrame(frame_time=ref.timestamp, members=members))
            self.frames_emitted += 1
            i = 0
        return frames


def summarize(frames: Iterable[SyncedFrame], reference_count: int, cfg: SyncConfig) -> SyncStats:
    frames = list(frames)
    others = [s for s in cfg.streams if s != cfg.reference]
    mean_dt = {
        s: float(np.mean([abs(f.members[s].timestamp - f.frame_time) for f in frames])) if frames else 0.0
        for s in others
    }
    rate = len(frames) / reference_count if reference_count else 0.0
    return SyncStats(
        reference_count=reference_count,
        frames_emitted=len(frames),
        match_rate=rate,
        mean_abs_dt=mean_dt,
    )


def synchronize(messages: Iterable[StampedMessage], cfg: SyncConfig | None = None) -> tuple[list[SyncedFrame], SyncStats]:
    """Feed a globally ordered trace through a fresh synchronizer."""
    sync = Synchronizer(cfg)
    frames: list[SyncedFrame] = []
    for msg in messages:
        frames.extend(sync.push(msg))
    return frames, summarize(frames, sync.reference_count, sync.cfg)


def generate_trace(
    rates: Mapping[StreamId | str, float],
    jitter: float,
    duration: float,
    seed: int,
) -> list[StampedMessage]:
    """Messages at i / rate (+ Gaussian jitter) for every stream, in global
    (timestamp, stream) order. Phases are aligned at t = 0."""
    if not duration > 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    if jitter < 0:
        raise ValueError(f"jitter must be >= 0, got {jitter}")
    rng = np.random.default_rng(seed)
    normalized = {StreamId(s): float(r) for s, r in rates.items()}
    messages: list[StampedMessage] = []
    for stream in STREAM_ORDER:
        if stream not in normalized:
            continue
        rate = normalized[stream]
        if not rate > 0:
            raise ValueError(f"Rate for {stream.value} must be > 0, got {rate}")
        count = math.ceil(duration * rate)
        times = np.arange(count, dtype=np.float64) / rate
        if jitter > 0:
            times = np.unique(times + rng.normal(0.0, jitter, size=count))
        messages.extend(
            StampedMessage(stream, float(t), f"{stream.value}-{i}") for i, t in enumerate(times)
        )
    order = {s: i for i, s in enumerate(STREAM_ORDER)}
    messages.sort(key=lambda m: (m.timestamp, order[m.stream_id]))
    return messages


def run_simulation(
    rates: Mapping[StreamId | str, float],
    jitter: float,
    duration: float,
    cfg: SyncConfig | None = None,
    seed: int = 0,
) -> SyncStats:
    cfg = cfg or SyncConfig(streams=tuple(s for s in STREAM_ORDER if s in {StreamId(k) for k in rates}))
    trace = generate_trace(rates, jitter, duration, seed)
    _, stats = synchronize(trace, cfg)
    logger.info(
        "Synchronisation simulated",
        frames=stats.frames_emitted,
        references=stats.reference_count,
        match_rate=stats.match_rate,
    )
    return stats
