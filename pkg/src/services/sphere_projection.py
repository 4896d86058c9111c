"""Dual-fisheye spherical camera projection.

3D points in the sensor frame are converted to an azimuth theta = atan2(Y, Z) and a
polar angle phi = atan2(sqrt(Y^2 + Z^2), X + eps) measured from the +X (front lens)
axis. The radius polynomial maps a lens-local polar angle to a normalised radius on
the fisheye disc; the front lens uses phi, the back lens uses pi - phi (its angle
from the -X axis). Front points are shifted into the right image half and back
points into the left half, then scaled to pixels and clipped to the image.

Every function is pure and safe to call from any number of threads.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from src.dto.camera_dto import CameraCalibration, PixelCoord, Point3


def _as_points(points: Sequence[Point3] | np.ndarray) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=np.float64)
        if arr.size == 0:
            return np.empty((0, 3), dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"Expected an (N, 3) point array, got shape {arr.shape}")
        return arr
    if len(points) == 0:
        return np.empty((0, 3), dtype=np.float64)
    return np.array([(p.x, p.y, p.z) for p in points], dtype=np.float64)


def spherical_angles(points: np.ndarray, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised (theta, phi) for an (N, 3) array; theta in (-pi, pi], phi in [0, pi]."""
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    rho = np.hypot(y, z)
    theta = np.arctan2(y, z)
    # theta is arbitrary on the X axis; pin it so results are deterministic
    theta = np.where(rho == 0.0, 0.0, theta)
    theta = np.where(theta == -np.pi, np.pi, theta)
    phi = np.arctan2(rho, x + epsilon)
    return theta, phi


def to_spherical(p: Point3, cal: CameraCalibration) -> tuple[float, float]:
    theta, phi = spherical_angles(p.as_array()[None, :], cal.epsilon)
    return float(theta[0]), float(phi[0])


def radius(phi: float | np.ndarray, cal: CameraCalibration) -> float | np.ndarray:
    """Horner evaluation of a4*phi^4 + a3*phi^3 + a2*phi^2 + a1*phi + a0."""
    a0, a1, a2, a3, a4 = cal.coeffs
    r = (((a4 * phi + a3) * phi + a2) * phi + a1) * phi + a0
    if isinstance(r, np.ndarray):
        return r
    return float(r)


def fisheye_plane(points: Sequence[Point3] | np.ndarray, cal: CameraCalibration) -> np.ndarray:
    """Normalised lens-plane coordinates (x, y) before the hemisphere shift, shape (N, 2)."""
    pts = _as_points(points)
    theta, phi = spherical_angles(pts, cal.epsilon)
    front = pts[:, 0] > 0
    lens_phi = np.where(front, phi, math.pi - phi)
    r = radius(lens_phi, cal)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def project_array(points: Sequence[Point3] | np.ndarray, cal: CameraCalibration) -> np.ndarray:
    """Project (N, 3) points to clipped pixel coordinates, shape (N, 2) as (u, v)."""
    pts = _as_points(points)
    if pts.shape[0] == 0:
        return np.empty((0, 2), dtype=np.float64)
    plane = fisheye_plane(pts, cal)
    x, y = plane[:, 0], plane[:, 1]
    x = np.where(pts[:, 0] > 0, (x + 1.0) / 2.0, (x - 1.0) / 2.0)
    u = (x + 1.0) / 2.0 * cal.width
    v = (-y + 1.0) / 2.0 * cal.height
    u = np.clip(u, 0.0, cal.width - 1)
    v = np.clip(v, 0.0, cal.height - 1)
    return np.stack([u, v], axis=1)


def project(p: Point3, cal: CameraCalibration) -> PixelCoord:
    u, v = project_array(p.as_array()[None, :], cal)[0]
    return PixelCoord(float(u), float(v))


def project_batch(points: Sequence[Point3], cal: CameraCalibration) -> list[PixelCoord]:
    """Elementwise project, order preserved."""
    return [PixelCoord(float(u), float(v)) for u, v in project_array(points, cal)]
