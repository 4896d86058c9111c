"""Data structures for the dual-fisheye spherical camera model.

The camera is a single device with two back-to-back fisheye lenses; its raw frame
places the back lens image in the left half and the front lens image in the right
half. A calibration is a fourth-order radius polynomial in the polar angle plus the
image size it was fitted for.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.config.config import (
    DEFAULT_COEFFS,
    DEFAULT_EPSILON,
    DEFAULT_IMAGE_HEIGHT,
    DEFAULT_IMAGE_WIDTH,
)

# Samples used to check that r(phi) stays finite over [0, pi].
_RADIUS_CHECK_SAMPLES = 181


@dataclass(frozen=True, slots=True)
class CameraCalibration:
    """Polynomial fisheye model: r(phi) = a4*phi^4 + a3*phi^3 + a2*phi^2 + a1*phi + a0.

    Attributes:
        coeffs: (a0, a1, a2, a3, a4), lowest order first.
        width: Full dual-fisheye image width in pixels (even).
        height: Image height in pixels.
        epsilon: Guard added to X in the polar-angle denominator.
    """

    coeffs: tuple[float, float, float, float, float] = DEFAULT_COEFFS
    width: int = DEFAULT_IMAGE_WIDTH
    height: int = DEFAULT_IMAGE_HEIGHT
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if len(self.coeffs) != 5:
            raise ValueError(f"Calibration needs 5 coefficients (a0..a4), got {len(self.coeffs)}")
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))
        if self.width < 2 or self.width % 2:
            raise ValueError(f"Image width must be even and >= 2, got {self.width}")
        if self.height < 1:
            raise ValueError(f"Image height must be >= 1, got {self.height}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        phis = np.linspace(0.0, math.pi, _RADIUS_CHECK_SAMPLES)
        with np.errstate(over="ignore", invalid="ignore"):
            radii = np.polynomial.polynomial.polyval(phis, self.coeffs)
        if not np.all(np.isfinite(radii)):
            raise ValueError("Radius polynomial is not finite over [0, pi]")


@dataclass(frozen=True, slots=True)
class Point3:
    """Point in the sensor Cartesian frame, meters."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"Point components must be finite, got ({self.x}, {self.y}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True, slots=True)
class PixelCoord:
    """Continuous pixel coordinate; consumers decide on rounding."""

    u: float
    v: float
