"""Equirectangular projection: spherical coordinates, UV mapping, pixel rays.

Conventions: z is up, azimuth theta = atan2(x, y) in (-pi, pi] (so +y is
forward at theta = 0), polar angle phi = arccos(z / r) in [0, pi], and
elevation a = pi/2 - phi is signed from the horizon.  Pixel centers sit at
half-integer offsets, which keeps the poles and the horizon off the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PanoramaGrid:
    width: int
    height: int

    def __post_init__(self):
        if self.width != 2 * self.height:
            raise ValueError("panorama width must be exactly 2x height")
        if self.width < 64:
            raise ValueError("panorama width must be >= 64")
        if self.width % 2 or self.height % 2:
            raise ValueError("panorama dimensions must be even")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


def project_spherical(p) -> tuple[float, float, float]:
    """Cartesian -> (r, theta, phi).  p must be nonzero."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise ValueError("cannot project the origin")
    theta = math.atan2(x, y)
    phi = math.acos(max(-1.0, min(1.0, z / r)))
    return r, theta, phi


def spherical_to_uv(theta: float, phi: float) -> tuple[float, float]:
    """(theta, phi) -> (u, v) in [0, 1]^2."""
    if not (-math.pi < theta <= math.pi + 1e-12):
        raise ValueError(f"theta {theta} outside (-pi, pi]")
    if not (0.0 <= phi <= math.pi):
        raise ValueError(f"phi {phi} outside [0, pi]")
    return (theta + math.pi) / (2.0 * math.pi), phi / math.pi


def pixel_elevation(grid: PanoramaGrid, row) -> np.ndarray | float:
    """Signed elevation from the horizon at the pixel-row center."""
    return math.pi / 2.0 - ((np.asarray(row) + 0.5) / grid.height) * math.pi


def yaw_column_shift(grid: PanoramaGrid, yaw: float) -> float:
    """Camera yaw expressed in pixel columns."""
    return yaw * grid.width / (2.0 * math.pi)


def column_azimuths(grid: PanoramaGrid, yaw: float = 0.0) -> np.ndarray:
    """World azimuth of each pixel-column center.

    Computed in column units so that a yaw change of a whole number of
    columns yields bit-identical angles at the rolled columns.
    """
    s = yaw_column_shift(grid, yaw)
    t = np.mod(np.arange(grid.width) + 0.5 + s, grid.width)
    return (t / grid.width) * (2.0 * math.pi) - math.pi


def pixel_to_ray(grid: PanoramaGrid, row: int, col: int, yaw: float = 0.0
                 ) -> tuple[np.ndarray, float]:
    """Unit world-space direction and elevation of a pixel center."""
    if not (0 <= row < grid.height and 0 <= col < grid.width):
        raise IndexError(f"pixel ({row}, {col}) outside {grid.shape}")
    a = float(pixel_elevation(grid, row))
    theta = float(column_azimuths(grid, yaw)[col])
    ca = math.cos(a)
    d = np.array([ca * math.sin(theta), ca * math.cos(theta), math.sin(a)])
    return d, a


def world_point_to_pixel(grid: PanoramaGrid, p, yaw: float = 0.0
                         ) -> tuple[float, float]:
    """Continuous (col, row) pixel position of a camera-relative point.

    The column is returned un-wrapped modulo the width; the caller decides
    how to wrap.  Inverse of pixel_to_ray up to the wrap.
    """
    _, theta, phi = project_spherical(p)
    s = yaw_column_shift(grid, yaw)
    col = (theta + math.pi) * grid.width / (2.0 * math.pi) - s - 0.5
    row = phi * grid.height / math.pi - 0.5
    return col, row
