"""Tests for synthetic scene generation."""
from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import pytest
from scipy import ndimage

from src.converter import codecs
from src.dto.sampling_dto import SamplingConfig
from src.dto.scene_dto import SceneSpec
from src.services.sampling import dense_pass
from src.services.scene_generator import SCENE_FILES, GeneratedScene, generate_scene, write_scene


class TestGenerateScene:
    """Tests for generate_scene."""

    def test_no_boxes_gives_empty_ground_truth(self, small_scene_spec: SceneSpec) -> None:
        """An empty road rasterises to an all-zero grid and a flat indicator."""
        scene = generate_scene(dataclasses.replace(small_scene_spec, n_boxes=0))
        assert scene.boxes == ()
        assert int(scene.ground_truth.values.sum()) == 0
        assert np.all(scene.feature_map.data[0] == 0.0)

    def test_same_spec_same_scene(self, small_scene_spec: SceneSpec) -> None:
        """Generation is fully seeded."""
        a = generate_scene(small_scene_spec)
        b = generate_scene(small_scene_spec)
        assert a.boxes == b.boxes
        np.testing.assert_array_equal(a.feature_map.data, b.feature_map.data)
        np.testing.assert_array_equal(a.ground_truth.values, b.ground_truth.values)

    def test_different_seeds_move_the_boxes(self, small_scene_spec: SceneSpec) -> None:
        """Changing the seed changes the layout."""
        other = generate_scene(dataclasses.replace(small_scene_spec, seed=4))
        assert other.boxes != generate_scene(small_scene_spec).boxes

    def test_each_box_is_its_own_component(self, small_scene: GeneratedScene) -> None:
        """Boxes never touch, so the ground truth has one blob per box."""
        _, components = ndimage.label(small_scene.ground_truth.values)
        assert components == len(small_scene.boxes) == 3

    def test_boxes_stand_on_the_ground(self, small_scene: GeneratedScene) -> None:
        """Box bottoms sit at the lowest pillar height."""
        for box in small_scene.boxes:
            assert box.center[2] - box.size[2] / 2 == pytest.approx(-1.0)

    def test_feature_map_layout(self, small_scene: GeneratedScene, small_scene_spec: SceneSpec) -> None:
        """Indicator peaks at 1, channel 1 is constant and the map is float32-exact."""
        data = small_scene.feature_map.data
        assert data.shape == (4, 32, 64)
        assert data[0].max() == pytest.approx(1.0)
        assert np.all(data[1] == 1.0)
        np.testing.assert_array_equal(data, data.astype(np.float32).astype(np.float64))

    def test_box_cells_decode_above_open_road(self, small_scene: GeneratedScene) -> None:
        """On average, ground-truth cells receive higher logits than background."""
        logits = dense_pass(
            small_scene.feature_map,
            small_scene.calibration,
            SamplingConfig(n_coarse=None),
            small_scene.spec.grid,
            small_scene.decoder,
        ).values
        gt = small_scene.ground_truth.values.astype(bool)
        assert logits[gt].mean() > logits[~gt].mean()

    def test_impossible_placement_is_reported(self) -> None:
        """Too many boxes for the placement square fail cleanly."""
        spec = SceneSpec(n_boxes=50, placement_half_extent=2.0)
        with pytest.raises(ValueError, match="disjoint boxes"):
            generate_scene(spec)

    def test_spec_rejects_single_channel_maps(self) -> None:
        """The indicator and bias channels are both required."""
        with pytest.raises(ValueError, match="at least 2 channels"):
            SceneSpec(channels=1)


class TestWriteScene:
    """Tests for write_scene."""

    def test_writes_every_artifact(self, small_scene: GeneratedScene, tmp_path: Path) -> None:
        """Each role maps to its file, and every file reads back unchanged."""
        paths = write_scene(small_scene, tmp_path / "scene")
        assert {role: p.name for role, p in paths.items()} == SCENE_FILES
        assert all(p.exists() for p in paths.values())

        np.testing.assert_array_equal(codecs.read_feature_map(paths["featmap"]).data, small_scene.feature_map.data)
        np.testing.assert_array_equal(
            codecs.read_pgm(paths["gt"], small_scene.spec.grid).values, small_scene.ground_truth.values
        )
        assert tuple(codecs.read_annotations(paths["annotations"])) == small_scene.boxes
        assert codecs.read_calibration(paths["calibration"]) == small_scene.calibration
        assert codecs.read_decoder(paths["decoder"]) == small_scene.decoder
