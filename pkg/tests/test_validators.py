"""Tests for CLI option parsers."""
from __future__ import annotations

import click
import pytest

from src.cli.utils.validators import build_grid, parse_anchor, parse_classes, parse_ranges, parse_weights
from src.dto.bev_dto import ObjectClass


class TestParsers:
    """Tests for the comma-separated option parsers."""

    def test_ranges(self) -> None:
        """Ranges are floats in the given order."""
        assert parse_ranges("100,50,20") == (100.0, 50.0, 20.0)

    def test_weights_need_three_values(self) -> None:
        """seg, center and offset each need a weight."""
        assert parse_weights("2,0.5,1") == (2.0, 0.5, 1.0)
        with pytest.raises(click.BadParameter, match="expected 3 weights"):
            parse_weights("1,1")

    def test_non_numbers_are_rejected(self) -> None:
        """Garbage is a bad parameter."""
        with pytest.raises(click.BadParameter, match="comma-separated numbers"):
            parse_ranges("100,far")

    def test_anchor(self) -> None:
        """ROW,COL becomes an int pair."""
        assert parse_anchor("12,40") == (12, 40)
        with pytest.raises(click.BadParameter, match="ROW,COL"):
            parse_anchor("1,2,3")

    def test_classes(self) -> None:
        """No classes means no filter."""
        assert parse_classes(()) is None
        assert parse_classes(("bicycle",)) == (ObjectClass.BICYCLE,)

    def test_grid_errors_become_bad_parameters(self) -> None:
        """A side that is not a whole number of cells is reported on --side/--res."""
        assert build_grid(20.0, 0.5).cells == 40
        with pytest.raises(click.BadParameter):
            build_grid(10.0, 0.3)
