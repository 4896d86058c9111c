"""Output formatting utilities for CLI.

Machine-readable output (JSON, CSV) goes to stdout and never carries timestamps so
repeated runs are byte-identical. Rich tables are for humans and go to stderr.
"""

import json
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from rich.table import Table

from src.dto.loss_dto import LossReport
from src.dto.metrics_dto import IouReport
from src.dto.sync_dto import StreamId, SyncedFrame, SyncStats


def to_json(payload: Any) -> str:
    """Stable JSON: sorted keys, no trailing whitespace."""
    return json.dumps(payload, sort_keys=True)


def format_number(value: float) -> str:
    return f"{value:.6f}"


def format_pixels_csv(uv: np.ndarray) -> str:
    lines = ["u,v"]
    lines.extend(f"{format_number(u)},{format_number(v)}" for u, v in np.asarray(uv).reshape(-1, 2))
    return "\n".join(lines) + "\n"


def format_features_csv(anchors: np.ndarray, pooled: np.ndarray) -> str:
    channels = pooled.shape[1] if pooled.ndim == 2 else 0
    lines = [",".join(["row", "col"] + [f"f{c}" for c in range(channels)])]
    for (row, col), feats in zip(np.asarray(anchors).reshape(-1, 2), pooled):
        lines.append(",".join([str(int(row)), str(int(col))] + [format_number(f) for f in feats]))
    return "\n".join(lines) + "\n"


def format_frames_csv(frames: Iterable[SyncedFrame], streams: Sequence[StreamId]) -> str:
    lines = [",".join(["frame_time"] + [s.value for s in streams])]
    for frame in frames:
        cells = [format_number(frame.frame_time)]
        cells.extend(format_number(frame.members[s].timestamp) for s in streams)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def format_iou_table(report: IouReport, eff: float | None = None) -> Table:
    table = Table(title="IoU", show_header=True, header_style="bold cyan")
    table.add_column("Range", style="cyan", no_wrap=True)
    table.add_column("IoU (%)", justify="right", style="green")
    for key, value in report.to_percent_dict().items():
        table.add_row(key, f"{value:.1f}")
    if eff is not None:
        table.add_row("eff_score", f"{eff:.2f}")
    return table


def format_loss_table(report: LossReport) -> Table:
    table = Table(title="Losses", show_header=True, header_style="bold cyan")
    table.add_column("Head", style="cyan", no_wrap=True)
    table.add_column("Loss", justify="right", style="green")
    for head, value in report.to_dict().items():
        table.add_row(head, "-" if value is None else format_number(value))
    return table


def format_sync_table(stats: SyncStats) -> Table:
    table = Table(title="Synchronisation", show_header=True, header_style="bold cyan")
    table.add_column("Metric", style="cyan", no_wrap=True)
    table.add_column("Value", justify="right", style="green")
    table.add_row("Reference messages", str(stats.reference_count))
    table.add_row("Frames emitted", str(stats.frames_emitted))
    table.add_row(
        "Match rate",
        f"{stats.match_rate:.3f}",
        style="yellow" if stats.match_rate < 0.9 else "green",
    )
    for stream, dt in stats.mean_abs_dt.items():
        table.add_row(f"Mean |dt| {stream.value}", f"{dt * 1000:.2f} ms")
    return table


def format_summary_table(summary: Mapping[str, Any], title: str = "Summary") -> Table:
    table = Table(title=title, show_header=True, header_style="bold cyan")
    table.add_column("Metric", style="cyan", no_wrap=True)
    table.add_column("Value", justify="right", style="green")
    for key, value in summary.items():
        table.add_row(key.replace("_", " ").capitalize(), str(value))
    return table
