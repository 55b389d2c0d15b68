"""Brute-force ray-casting reference for depth and semantic maps.

Intersects every pixel ray against the floor plane, the ceiling plane, and
each wall rectangle, taking the nearest positive hit.  Exists to check the
analytic formulas in panorama.py; shares none of their shortcuts.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .panorama import DOOR, WINDOW, DepthMap, SemanticMap, _relative_heights
from .projection import PanoramaGrid, column_azimuths, pixel_elevation
from .shapes import CameraPose, RoomShape, validate_camera


def raycast_oracle(shape: RoomShape, cam: CameraPose, grid: PanoramaGrid
                   ) -> tuple[DepthMap, SemanticMap]:
    """Exact per-pixel nearest-hit depth and surface labels."""
    validate_camera(shape, cam)
    z_floor, z_ceil = _relative_heights(shape, cam)
    az = column_azimuths(grid, cam.yaw)
    a = pixel_elevation(grid, np.arange(grid.height))
    depth, label, edge, s, z = kernels.raycast(
        np.sin(az), np.cos(az), np.sin(a), np.cos(a),
        cam.position[0], cam.position[1], z_floor, z_ceil, shape.edges)
    label = label.astype(np.uint8)
    for op in shape.openings:
        wall_len = shape.wall_length(op.wall)
        along = s * wall_len
        z_above_floor = z + cam.height
        mask = ((edge == op.wall)
                & (along >= op.offset) & (along <= op.offset + op.width)
                & (z_above_floor >= op.sill)
                & (z_above_floor <= op.sill + op.height))
        label[mask] = DOOR if op.kind == "door" else WINDOW
    return DepthMap(grid=grid, data=depth), SemanticMap(grid=grid, data=label)


def transition_mask(semantic: SemanticMap, radius: int = 2) -> np.ndarray:
    """True for pixels within `radius` of a label change (seam-aware)."""
    lab = semantic.data
    change = np.zeros(lab.shape, dtype=bool)
    change[:, :] |= lab != np.roll(lab, 1, axis=1)
    change[:, :] |= lab != np.roll(lab, -1, axis=1)
    change[1:, :] |= lab[1:] != lab[:-1]
    change[:-1, :] |= lab[1:] != lab[:-1]
    out = change
    for _ in range(radius - 1):
        grown = out.copy()
        grown |= np.roll(out, 1, axis=1) | np.roll(out, -1, axis=1)
        grown[1:] |= out[:-1]
        grown[:-1] |= out[1:]
        out = grown
    return out
