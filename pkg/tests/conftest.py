"""Pytest fixtures and configuration for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

from src.dto.bev_dto import BoundingBox3D, GridSpec, ObjectClass
from src.dto.camera_dto import CameraCalibration
from src.dto.sampling_dto import FeatureMap
from src.dto.scene_dto import SceneSpec
from src.services.decoders import AffineMeanPoolDecoder
from src.services.scene_generator import GeneratedScene, generate_scene


@pytest.fixture
def calibration() -> CameraCalibration:
    """The default equidistant-like calibration on a 1280x640 image."""
    return CameraCalibration()


@pytest.fixture
def grid() -> GridSpec:
    """The default 100 m / 0.5 m grid (200 x 200 cells)."""
    return GridSpec()


@pytest.fixture
def small_grid() -> GridSpec:
    """A 20 m / 0.5 m grid (40 x 40 cells) for fast oracle checks."""
    return GridSpec(side_meters=20.0, resolution=0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def affine_feature_map() -> FeatureMap:
    """3-channel 32x64 map with channel c = c + 0.5 * col - 0.25 * row."""
    c, h, w = 3, 32, 64
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    data = np.stack([ch + 0.5 * cols - 0.25 * rows for ch in range(c)])
    return FeatureMap(data)


@pytest.fixture
def channel_sum_decoder() -> AffineMeanPoolDecoder:
    return AffineMeanPoolDecoder(weights=(1.0, -0.5, 0.25), bias=0.1)


@pytest.fixture
def vehicle_box() -> BoundingBox3D:
    """A 4 m x 2 m car 10 m ahead, axis aligned."""
    return BoundingBox3D(
        center=(10.0, 0.0, 0.0),
        rotation=(0.0, 0.0, 0.0),
        size=(4.0, 2.0, 1.5),
        class_label=ObjectClass.VEHICLE,
    )


@pytest.fixture
def small_scene_spec() -> SceneSpec:
    """Three cars on a 40 m grid with a small feature map."""
    return SceneSpec(
        seed=3,
        n_boxes=3,
        placement_half_extent=15.0,
        fm_height=32,
        fm_width=64,
        grid=GridSpec(side_meters=40.0, resolution=0.5),
    )


@pytest.fixture
def small_scene(small_scene_spec: SceneSpec) -> GeneratedScene:
    return generate_scene(small_scene_spec)
