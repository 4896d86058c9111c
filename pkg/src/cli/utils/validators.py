"""Parsers for the comma-separated option values used across commands."""
from typing import Optional

import click

from src.dto.bev_dto import GridSpec, ObjectClass


def _floats(value: str, param_hint: str) -> tuple[float, ...]:
    try:
        out = tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}", param_hint=param_hint)
    if not out:
        raise click.BadParameter("expected at least one number", param_hint=param_hint)
    return out


def parse_ranges(value: str) -> tuple[float, ...]:
    """'100,50,20' -> (100.0, 50.0, 20.0)"""
    return _floats(value, "--ranges")


def parse_weights(value: str) -> tuple[float, float, float]:
    weights = _floats(value, "--weights")
    if len(weights) != 3:
        raise click.BadParameter(f"expected 3 weights (seg,center,offset), got {len(weights)}", param_hint="--weights")
    return weights[0], weights[1], weights[2]


def parse_anchor(value: str) -> tuple[int, int]:
    """'12,40' -> (12, 40)"""
    parts = value.split(",")
    try:
        row, col = (int(p) for p in parts)
    except ValueError:
        raise click.BadParameter(f"expected ROW,COL, got {value!r}", param_hint="--anchor")
    return row, col


def parse_classes(values: tuple[str, ...]) -> Optional[tuple[ObjectClass, ...]]:
    if not values:
        return None
    return tuple(ObjectClass(v) for v in values)


def build_grid(side: float, resolution: float) -> GridSpec:
    try:
        return GridSpec(side_meters=side, resolution=resolution)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--side/--res")
