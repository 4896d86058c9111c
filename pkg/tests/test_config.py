"""Tests for runtime configuration and the chunked worker pool."""
from __future__ import annotations

from unittest.mock import patch

import pytest

from src.config.config import get_thread_count
from src.utils.parallel import chunk_bounds, ordered_chunk_map


class TestGetThreadCount:
    """Tests for SPHEREBEV_THREADS resolution."""

    def test_explicit_count(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """A positive value is used as is."""
        monkeypatch.setenv("SPHEREBEV_THREADS", "3")
        assert get_thread_count() == 3

    def test_zero_means_one_per_cpu(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """0 resolves to the CPU count."""
        monkeypatch.setenv("SPHEREBEV_THREADS", "0")
        monkeypatch.setattr("src.config.config.os.cpu_count", lambda: 6)
        assert get_thread_count() == 6

    def test_unknown_cpu_count_falls_back_to_one(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """os.cpu_count() may return None."""
        monkeypatch.setenv("SPHEREBEV_THREADS", "0")
        monkeypatch.setattr("src.config.config.os.cpu_count", lambda: None)
        assert get_thread_count() == 1

    @pytest.mark.parametrize("raw", ["many", "-2"])
    def test_rejects_bad_values(self, monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
        """Non-integers and negative counts are configuration errors."""
        monkeypatch.setenv("SPHEREBEV_THREADS", raw)
        with pytest.raises(ValueError, match="SPHEREBEV_THREADS"):
            get_thread_count()


class TestChunking:
    """Tests for chunk_bounds and ordered_chunk_map."""

    def test_chunks_cover_the_range_in_order(self) -> None:
        """Chunks are contiguous and together cover every index once."""
        bounds = chunk_bounds(10_000, workers=4)
        assert bounds[0][0] == 0
        assert bounds[-1][1] == 10_000
        assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))
        assert len(bounds) == 4

    def test_small_inputs_stay_in_one_chunk(self) -> None:
        """Fewer items than one minimum chunk are not split."""
        assert chunk_bounds(100, workers=8) == [(0, 100)]

    def test_nothing_to_do(self) -> None:
        """No items, no chunks."""
        assert chunk_bounds(0, workers=4) == []
        assert ordered_chunk_map(lambda a, b: (a, b), 0, workers=4) == []

    def test_results_come_back_in_chunk_order(self) -> None:
        """Concatenated results equal a sequential map."""
        chunks = ordered_chunk_map(lambda a, b: list(range(a, b)), 5000, workers=4, min_chunk=100)
        assert [i for chunk in chunks for i in chunk] == list(range(5000))

    def test_worker_count_defaults_to_the_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Without an explicit count, SPHEREBEV_THREADS decides."""
        monkeypatch.setenv("SPHEREBEV_THREADS", "2")
        chunks = ordered_chunk_map(lambda a, b: (a, b), 2000, min_chunk=100)
        assert chunks == [(0, 1000), (1000, 2000)]

    def test_thread_count_is_read_through_config(self) -> None:
        """The pool size comes from get_thread_count when none is passed."""
        with patch("src.utils.parallel.get_thread_count", return_value=3) as mocked:
            chunks = ordered_chunk_map(lambda a, b: (a, b), 3000, min_chunk=100)
        mocked.assert_called_once_with()
        assert chunks == [(0, 1000), (1000, 2000), (2000, 3000)]
