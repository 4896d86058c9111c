"""On-disk formats.

All binary formats are little-endian.

  PGM        binary P5 greymap, 0 / 255, for {0,1} label grids
  BEVR       float32 raster: 16-byte header (magic "BEVR", version u16, channels u16,
             cells u32, resolution f32) then channels x cells x cells float32
  FMAP       feature map: 16-byte header (magic "FMAP", C, H, W as u32) then C x H x W float32
  points     bare float32 (x, y, z) triples
  JSON       calibration, annotations and decoder documents
  CSV        sensor traces, `stream_id,timestamp`, header optional

Malformed input raises CodecError naming the file and, where known, the byte offset.
"""
from __future__ import annotations

import csv
import io
import json
import math
import struct
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np

from src.converter.converters import (
    boxes_from_list,
    boxes_to_list,
    calibration_from_dict,
    calibration_to_dict,
    decoder_from_dict,
    decoder_to_dict,
)
from src.dto.bev_dto import BevGrid, BoundingBox3D, GridSpec
from src.dto.camera_dto import CameraCalibration
from src.dto.sampling_dto import FeatureMap
from src.dto.sync_dto import StampedMessage, StreamId
from src.logging.logging import get_logger
from src.services.decoders import AffineMeanPoolDecoder

logger = get_logger(__name__)

T = TypeVar("T")

RASTER_MAGIC = b"BEVR"
RASTER_VERSION = 1
RASTER_HEADER = struct.Struct("<4sHHIf")
FMAP_MAGIC = b"FMAP"
FMAP_HEADER = struct.Struct("<4sIII")
POINT_RECORD = 12
TRACE_HEADER = ("stream_id", "timestamp")

_F32 = np.dtype("<f4")


class CodecError(ValueError):
    """A file could not be read or does not follow its format."""

    def __init__(self, path: str | Path, reason: str, offset: Optional[int] = None) -> None:
        self.path = str(path)
        self.offset = offset
        where = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"{self.path}{where}: {reason}")


def _read_bytes(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise CodecError(path, f"cannot read file ({e.strerror or e})") from e


def _write_bytes(path: str | Path, payload: bytes) -> None:
    Path(path).write_bytes(payload)
    logger.debug("Wrote file", path=str(path), size=len(payload))


def _f32_payload(path: str | Path, blob: bytes, offset: int, count: int) -> np.ndarray:
    expected = offset + count * _F32.itemsize
    if len(blob) != expected:
        raise CodecError(
            path,
            f"expected {count} float32 values ({expected} bytes total), file has {len(blob)} bytes",
            offset=min(len(blob), expected),
        )
    return np.frombuffer(blob, dtype=_F32, count=count, offset=offset).astype(np.float64)


# ---------- PGM ----------

def _pgm_tokens(path: str | Path, blob: bytes, count: int) -> tuple[list[int], int]:
    """First `count` header integers after the magic, and the payload offset."""
    values: list[int] = []
    pos = 2
    while len(values) < count:
        while pos < len(blob) and (blob[pos : pos + 1].isspace() or blob[pos : pos + 1] == b"#"):
            if blob[pos : pos + 1] == b"#":
                while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < len(blob) and blob[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CodecError(path, "malformed PGM header", offset=start)
        values.append(int(blob[start:pos]))
    if pos >= len(blob) or not blob[pos : pos + 1].isspace():
        raise CodecError(path, "PGM header must end with a single whitespace byte", offset=pos)
    return values, pos + 1


def read_pgm(path: str | Path, spec: Optional[GridSpec] = None) -> BevGrid:
    """Label grid from a P5 greymap; any nonzero byte is a positive cell."""
    blob = _read_bytes(path)
    if blob[:2] != b"P5":
        raise CodecError(path, "not a binary PGM (missing P5 magic)", offset=0)
    (width, height, maxval), offset = _pgm_tokens(path, blob, 3)
    if width != height or width < 1:
        raise CodecError(path, f"label grids must be square, got {width}x{height}", offset=2)
    if not 0 < maxval < 256:
        raise CodecError(path, f"only 8-bit PGM is supported, maxval {maxval}", offset=2)
    if len(blob) != offset + width * height:
        raise CodecError(
            path,
            f"expected {width * height} pixel bytes, found {len(blob) - offset}",
            offset=min(len(blob), offset + width * height),
        )
    spec = spec or GridSpec()
    if spec.cells != width:
        raise CodecError(path, f"grid is {width} cells wide, expected {spec.cells}", offset=2)
    pixels = np.frombuffer(blob, dtype=np.uint8, offset=offset).reshape(height, width)
    return BevGrid(spec, (pixels > 0).astype(np.uint8))


def write_pgm(path: str | Path, grid: BevGrid) -> None:
    n = grid.spec.cells
    pixels = np.where(np.asarray(grid.values) > 0, 255, 0).astype(np.uint8)
    _write_bytes(path, f"P5\n{n} {n}\n255\n".encode("ascii") + pixels.tobytes())


# ---------- BEVR raster ----------

def _resolution_from_f32(value: float) -> float:
    # the shortest decimal that survives float32 storage, e.g. 0.1 instead of 0.100000001
    return float(f"{np.float32(value):.7g}")


def read_raster(path: str | Path) -> tuple[GridSpec, np.ndarray]:
    """Grid spec and a (channels, cells, cells) float64 array."""
    blob = _read_bytes(path)
    if len(blob) < RASTER_HEADER.size:
        raise CodecError(path, "truncated raster header", offset=len(blob))
    magic, version, channels, cells, resolution = RASTER_HEADER.unpack_from(blob)
    if magic != RASTER_MAGIC:
        raise CodecError(path, f"bad raster magic {magic!r}", offset=0)
    if version != RASTER_VERSION:
        raise CodecError(path, f"unsupported raster version {version}", offset=4)
    if channels < 1 or cells < 1:
        raise CodecError(path, "raster channels and size must be positive", offset=6)
    res = _resolution_from_f32(resolution)
    if not res > 0:
        raise CodecError(path, f"raster resolution must be > 0, got {res}", offset=12)
    data = _f32_payload(path, blob, RASTER_HEADER.size, channels * cells * cells)
    spec = GridSpec(side_meters=cells * res, resolution=res)
    return spec, data.reshape(channels, cells, cells)


def write_raster(path: str | Path, spec: GridSpec, data: np.ndarray) -> None:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1:] != spec.shape:
        raise ValueError(f"Raster data must be (C, {spec.cells}, {spec.cells}), got {arr.shape}")
    header = RASTER_HEADER.pack(RASTER_MAGIC, RASTER_VERSION, arr.shape[0], spec.cells, spec.resolution)
    _write_bytes(path, header + arr.astype(_F32).tobytes())


def read_grid(path: str | Path) -> BevGrid:
    """Single-channel raster as a BevGrid."""
    spec, data = read_raster(path)
    if data.shape[0] != 1:
        raise CodecError(path, f"expected a 1-channel raster, got {data.shape[0]} channels", offset=6)
    return BevGrid(spec, data[0])


def write_grid(path: str | Path, grid: BevGrid) -> None:
    write_raster(path, grid.spec, np.asarray(grid.values, dtype=np.float64))


def read_label_grid(path: str | Path, spec: Optional[GridSpec] = None) -> BevGrid:
    """{0,1} grid from either a PGM or a 1-channel raster (nonzero is positive)."""
    head = _read_bytes(path)[:4]
    if head == RASTER_MAGIC:
        grid = read_grid(path)
        return BevGrid(grid.spec, (grid.values != 0).astype(np.uint8))
    return read_pgm(path, spec)


# ---------- FMAP ----------

def read_feature_map(path: str | Path) -> FeatureMap:
    blob = _read_bytes(path)
    if len(blob) < FMAP_HEADER.size:
        raise CodecError(path, "truncated feature-map header", offset=len(blob))
    magic, c, h, w = FMAP_HEADER.unpack_from(blob)
    if magic != FMAP_MAGIC:
        raise CodecError(path, f"bad feature-map magic {magic!r}", offset=0)
    if min(c, h, w) < 1:
        raise CodecError(path, f"feature-map dimensions must be positive, got {c}x{h}x{w}", offset=4)
    data = _f32_payload(path, blob, FMAP_HEADER.size, c * h * w)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data))[0])
        raise CodecError(path, "non-finite feature value", offset=FMAP_HEADER.size + bad * _F32.itemsize)
    return FeatureMap(data.reshape(c, h, w))


def write_feature_map(path: str | Path, fm: FeatureMap) -> None:
    header = FMAP_HEADER.pack(FMAP_MAGIC, fm.channels, fm.height, fm.width)
    _write_bytes(path, header + fm.data.astype(_F32).tobytes())


# ---------- points ----------

def read_points(path: str | Path) -> np.ndarray:
    """(N, 3) float64 points."""
    blob = _read_bytes(path)
    if len(blob) % POINT_RECORD:
        raise CodecError(
            path,
            f"size {len(blob)} is not a multiple of {POINT_RECORD} bytes",
            offset=len(blob) - len(blob) % POINT_RECORD,
        )
    values = np.frombuffer(blob, dtype=_F32).astype(np.float64)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise CodecError(path, "non-finite point coordinate", offset=bad * _F32.itemsize)
    return values.reshape(-1, 3)


def write_points(path: str | Path, points: np.ndarray) -> None:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    _write_bytes(path, pts.astype(_F32).tobytes())


# ---------- JSON ----------

def _read_json(path: str | Path) -> Any:
    blob = _read_bytes(path)
    try:
        return json.loads(blob.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise CodecError(path, "not UTF-8 text", offset=e.start) from e
    except json.JSONDecodeError as e:
        # JSONDecodeError.pos counts characters; convert to a byte offset
        offset = len(blob.decode("utf-8")[: e.pos].encode("utf-8"))
        raise CodecError(path, f"invalid JSON ({e.msg})", offset=offset) from e


def _write_json(path: str | Path, payload: Any) -> None:
    _write_bytes(path, (json.dumps(payload, indent=2) + "\n").encode("utf-8"))


def _parse(path: str | Path, fn: Callable[[Any], T]) -> T:
    doc = _read_json(path)
    try:
        return fn(doc)
    except (ValueError, TypeError, AttributeError) as e:
        raise CodecError(path, str(e)) from e


def read_calibration(path: str | Path) -> CameraCalibration:
    return _parse(path, calibration_from_dict)


def write_calibration(path: str | Path, cal: CameraCalibration) -> None:
    _write_json(path, calibration_to_dict(cal))


def read_annotations(path: str | Path) -> list[BoundingBox3D]:
    return _parse(path, boxes_from_list)


def write_annotations(path: str | Path, boxes: Sequence[BoundingBox3D]) -> None:
    _write_json(path, boxes_to_list(boxes))


def read_decoder(path: str | Path) -> AffineMeanPoolDecoder:
    return _parse(path, decoder_from_dict)


def write_decoder(path: str | Path, decoder: AffineMeanPoolDecoder) -> None:
    _write_json(path, decoder_to_dict(decoder))


# ---------- trace CSV ----------

def read_trace(path: str | Path) -> list[StampedMessage]:
    blob = _read_bytes(path)
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CodecError(path, "not UTF-8 text", offset=e.start) from e
    messages: list[StampedMessage] = []
    offset = 0
    for lineno, line in enumerate(text.splitlines(keepends=True)):
        line_offset = offset
        offset += len(line.encode("utf-8"))
        if not line.strip():
            continue
        row = next(csv.reader([line]))
        if lineno == 0 and tuple(c.strip() for c in row) == TRACE_HEADER:
            continue
        if len(row) != 2:
            raise CodecError(path, f"expected 'stream_id,timestamp', got {line.strip()!r}", offset=line_offset)
        try:
            stream = StreamId(row[0].strip())
            timestamp = float(row[1])
        except ValueError as e:
            raise CodecError(path, f"bad trace row {line.strip()!r}", offset=line_offset) from e
        if not math.isfinite(timestamp):
            raise CodecError(path, f"non-finite timestamp in {line.strip()!r}", offset=line_offset)
        messages.append(StampedMessage(stream, timestamp, f"{stream.value}@{row[1].strip()}"))
    return messages


def format_trace(messages: Iterable[StampedMessage]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for m in messages:
        writer.writerow([StreamId(m.stream_id).value, repr(float(m.timestamp))])
    return buf.getvalue()


def write_trace(path: str | Path, messages: Iterable[StampedMessage]) -> None:
    _write_bytes(path, format_trace(messages).encode("utf-8"))
