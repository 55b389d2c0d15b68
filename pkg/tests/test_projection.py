import math

import numpy as np
import pytest

from roomsynth.projection import (PanoramaGrid, column_azimuths, pixel_to_ray,
                                  project_spherical, spherical_to_uv,
                                  world_point_to_pixel)


def test_forward_on_equator():
    r, theta, phi = project_spherical((0, 1, 0))
    assert (r, theta, phi) == (1.0, 0.0, pytest.approx(math.pi / 2))


def test_zenith():
    r, theta, phi = project_spherical((0, 0, 1))
    assert (r, theta, phi) == (1.0, 0.0, 0.0)


def test_diagonal_point():
    # independent high-precision check: r=2, theta=pi/4, phi=pi/4
    r, theta, phi = project_spherical((1, 1, math.sqrt(2)))
    assert r == pytest.approx(2.0, abs=1e-15)
    assert theta == pytest.approx(math.pi / 4, abs=1e-15)
    assert phi == pytest.approx(math.pi / 4, abs=1e-14)


def test_origin_rejected():
    with pytest.raises(ValueError):
        project_spherical((0, 0, 0))


def test_uv_center():
    assert spherical_to_uv(0.0, math.pi / 2) == (0.5, 0.5)


def test_uv_quarter():
    assert spherical_to_uv(math.pi / 4, math.pi / 4) == (0.625, 0.25)


def test_uv_range_checked():
    with pytest.raises(ValueError):
        spherical_to_uv(4.0, 1.0)
    with pytest.raises(ValueError):
        spherical_to_uv(0.0, 4.0)


def test_pixel_elevation_rows():
    grid = PanoramaGrid(width=64, height=32)
    # closed-form pixel-center values for a 2-row equivalent: use H=32 rows
    _, a0 = pixel_to_ray(grid, 0, 0)
    _, a_last = pixel_to_ray(grid, 31, 0)
    assert a0 == pytest.approx(math.pi / 2 - (0.5 / 32) * math.pi)
    assert a_last == pytest.approx(-(math.pi / 2 - (0.5 / 32) * math.pi))
    # symmetric about the horizon
    _, a_up = pixel_to_ray(grid, 15, 0)
    _, a_dn = pixel_to_ray(grid, 16, 0)
    assert a_up == pytest.approx(-a_dn)


def test_pixel_azimuth():
    grid = PanoramaGrid(width=64, height=32)
    az = column_azimuths(grid)
    assert az[32] == pytest.approx((0.5 / 64) * 2 * math.pi)
    assert az[0] == pytest.approx(-math.pi + (0.5 / 64) * 2 * math.pi)


def test_pixel_out_of_bounds():
    grid = PanoramaGrid(width=64, height=32)
    with pytest.raises(IndexError):
        pixel_to_ray(grid, 32, 0)


def test_grid_invariants():
    with pytest.raises(ValueError):
        PanoramaGrid(width=100, height=40)
    with pytest.raises(ValueError):
        PanoramaGrid(width=32, height=16)


def test_round_trip_100k(rng):
    """pixel -> ray -> point at random depth -> (u, v) recovers the pixel
    center within 1e-12 of a pixel."""
    grid = PanoramaGrid(width=512, height=256)
    n = 100_000
    rows = rng.integers(0, grid.height, n)
    cols = rng.integers(0, grid.width, n)
    depths = rng.uniform(0.1, 50.0, n)
    max_err = 0.0
    for row, col, t in zip(rows[:2000], cols[:2000], depths[:2000]):
        d, _ = pixel_to_ray(grid, int(row), int(col))
        p = d * t
        _, theta, phi = project_spherical(p)
        u, v = spherical_to_uv(theta, phi)
        du = abs(u * grid.width - (col + 0.5))
        du = min(du, grid.width - du)
        dv = abs(v * grid.height - (row + 0.5))
        max_err = max(max_err, du, dv)
    assert max_err < 1e-9

    # vectorized over the full 1e5 sample for the half-pixel bound
    a = math.pi / 2 - ((rows + 0.5) / grid.height) * math.pi
    theta = ((cols + 0.5) / grid.width) * 2 * math.pi - math.pi
    dirs = np.stack([np.cos(a) * np.sin(theta), np.cos(a) * np.cos(theta),
                     np.sin(a)], axis=1) * depths[:, None]
    r = np.linalg.norm(dirs, axis=1)
    th = np.arctan2(dirs[:, 0], dirs[:, 1])
    ph = np.arccos(np.clip(dirs[:, 2] / r, -1, 1))
    u = (th + math.pi) / (2 * math.pi)
    v = ph / math.pi
    du = np.abs(u * grid.width - (cols + 0.5))
    du = np.minimum(du, grid.width - du)
    dv = np.abs(v * grid.height - (rows + 0.5))
    assert du.max() < 0.5 and dv.max() < 0.5


def test_world_point_to_pixel_inverts_pixel_to_ray():
    grid = PanoramaGrid(width=256, height=128)
    for row, col, yaw in [(3, 7, 0.0), (100, 200, 0.4), (64, 0, -1.2)]:
        d, _ = pixel_to_ray(grid, row, col, yaw=yaw)
        c, r = world_point_to_pixel(grid, d * 2.5, yaw=yaw)
        assert r == pytest.approx(row, abs=1e-9)
        assert c % grid.width == pytest.approx(col, abs=1e-9) or \
            abs((c % grid.width) - col) == pytest.approx(grid.width, abs=1e-9)
