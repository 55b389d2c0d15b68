"""Panorama map synthesis: layout boundaries, analytic depth, semantic labels,
and the per-column 1-D layout encoding.

All maps share one equirectangular grid and are horizontally periodic.
Azimuth-dependent quantities are computed per pixel column through
column_azimuths, which makes every map exactly roll-equivariant under
whole-pixel yaw changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import kernels
from .projection import (PanoramaGrid, column_azimuths, pixel_elevation,
                         world_point_to_pixel)
from .shapes import CameraPose, RoomShape, validate_camera

# semantic labels
CEILING, WALL, FLOOR, DOOR, WINDOW = 0, 1, 2, 3, 4
LABEL_NAMES = {CEILING: "ceiling", WALL: "wall", FLOOR: "floor",
               DOOR: "door", WINDOW: "window"}


class DegenerateLayoutError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutMap:
    grid: PanoramaGrid
    data: np.ndarray  # (H, W) uint8, boundary = 1


@dataclass(frozen=True)
class DepthMap:
    grid: PanoramaGrid
    data: np.ndarray  # (H, W) float64 slant depth in meters


@dataclass(frozen=True)
class SemanticMap:
    grid: PanoramaGrid
    data: np.ndarray  # (H, W) uint8 labels


@dataclass(frozen=True)
class TextureImage:
    grid: PanoramaGrid
    data: np.ndarray  # (H, W, 3) uint8 RGB


@dataclass(frozen=True)
class Layout1D:
    ceiling_v: np.ndarray  # (W,) in [0, 1]
    floor_v: np.ndarray    # (W,) in [0, 1]


def _relative_heights(shape: RoomShape, cam: CameraPose) -> tuple[float, float]:
    """Floor and ceiling z relative to the camera center."""
    return -cam.height, shape.ceiling_height - cam.height


def _column_geometry(shape: RoomShape, cam: CameraPose, grid: PanoramaGrid):
    """Per-column azimuth trig and nearest wall hit."""
    az = column_azimuths(grid, cam.yaw)
    sin_t = np.sin(az)
    cos_t = np.cos(az)
    cs, edge, off = kernels.plan_hits(sin_t, cos_t, cam.position[0],
                                     cam.position[1], shape.edges)
    return sin_t, cos_t, cs, edge, off


# ---------------------------------------------------------------------------
# GenDepth
# ---------------------------------------------------------------------------

def gen_depth(shape: RoomShape, cam: CameraPose, grid: PanoramaGrid) -> DepthMap:
    """Analytic slant depth per pixel.

    Floor and ceiling depths are |z / sin a|, wall depth is cs / cos a with
    cs the plan distance to the nearest wall along the column azimuth; the
    per-pixel surface is the minimum slant range among valid candidates.
    """
    validate_camera(shape, cam)
    z_floor, z_ceil = _relative_heights(shape, cam)
    _, _, cs, _, _ = _column_geometry(shape, cam, grid)

    a = pixel_elevation(grid, np.arange(grid.height))[:, None]
    sa = np.sin(a)
    ca = np.cos(a)
    t_wall = cs[None, :] / ca
    with np.errstate(divide="ignore"):
        t_floor = np.where(sa < 0.0, np.abs(z_floor / sa), np.inf)
        t_ceil = np.where(sa > 0.0, np.abs(z_ceil / sa), np.inf)
    depth = np.minimum(t_wall, np.minimum(t_floor, t_ceil))
    depth = np.broadcast_to(depth, grid.shape).copy()
    return DepthMap(grid=grid, data=depth)


# ---------------------------------------------------------------------------
# GenLayout
# ---------------------------------------------------------------------------

def _boundary_edges_3d(shape: RoomShape, cam: CameraPose):
    """The three boundary families as camera-relative 3D segments."""
    z_floor, z_ceil = _relative_heights(shape, cam)
    ox, oy = cam.position
    segs = []
    corners = shape.corners
    k = len(corners)
    for i in range(k):
        x0, y0 = corners[i] - (ox, oy)
        x1, y1 = corners[(i + 1) % k] - (ox, oy)
        segs.append(((x0, y0, z_floor), (x0, y0, z_ceil)))   # vertical edge
        segs.append(((x0, y0, z_floor), (x1, y1, z_floor)))  # wall-floor
        segs.append(((x0, y0, z_ceil), (x1, y1, z_ceil)))    # wall-ceiling
    return segs


def _project_px(grid: PanoramaGrid, p, yaw: float):
    col, row = world_point_to_pixel(grid, p, yaw)
    return col, row


def _col_dist(c0: float, c1: float, w: int) -> float:
    d = abs(c0 - c1)
    return min(d, w - d)


def _sample_segment(grid: PanoramaGrid, p0, p1, yaw: float, out: list,
                    max_depth: int = 40):
    """Adaptive subdivision until consecutive projected samples are closer
    than half a pixel."""
    w = grid.width
    stack = [(np.asarray(p0, float), np.asarray(p1, float),
              _project_px(grid, p0, yaw), _project_px(grid, p1, yaw), 0)]
    out.append(_project_px(grid, p0, yaw))
    while stack:
        a, b, pa, pb, depth = stack.pop()
        du = _col_dist(pa[0], pb[0], w)
        dv = abs(pa[1] - pb[1])
        if (du < 0.5 and dv < 0.5) or depth >= max_depth:
            out.append(pb)
            continue
        m = 0.5 * (a + b)
        pm = _project_px(grid, m, yaw)
        stack.append((m, b, pm, pb, depth + 1))
        stack.append((a, m, pa, pm, depth + 1))


def gen_layout(shape: RoomShape, cam: CameraPose, grid: PanoramaGrid) -> LayoutMap:
    """Binary raster of the projected room boundary polylines.

    Pixels whose centers lie within one pixel of a projected boundary curve
    are set; marking wraps across the horizontal seam.
    """
    validate_camera(shape, cam)
    h, w = grid.shape
    data = np.zeros((h, w), dtype=np.uint8)
    samples: list = []
    for p0, p1 in _boundary_edges_3d(shape, cam):
        _sample_segment(grid, p0, p1, cam.yaw, samples)
    for colf, rowf in samples:
        colf = colf % w
        c_lo = math.ceil(colf - 1.0)
        r_lo = max(0, math.ceil(rowf - 1.0))
        r_hi = min(h - 1, math.floor(rowf + 1.0))
        for c in range(c_lo, math.floor(colf + 1.0) + 1):
            dc = colf - c
            for r in range(r_lo, r_hi + 1):
                if dc * dc + (rowf - r) * (rowf - r) <= 1.0:
                    data[r, c % w] = 1
    return LayoutMap(grid=grid, data=data)


# ---------------------------------------------------------------------------
# GenSemantic
# ---------------------------------------------------------------------------

def _wrap_label(mask: np.ndarray):
    """4-connected components of a mask, merged across the left/right seam."""
    lab, n = ndimage.label(mask)
    if n == 0:
        return lab, n
    parent = list(range(n + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    left = lab[:, 0]
    right = lab[:, -1]
    for a, b in zip(left, right):
        if a and b:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    remap = np.array([find(i) for i in range(n + 1)])
    return remap[lab], n


def _absorb_boundary(labels: np.ndarray, unassigned: np.ndarray) -> np.ndarray:
    """Absorb boundary pixels into the surrounding regions, splitting the
    boundary band along its centerline: each boundary pixel takes the label
    of the nearest labeled region (horizontally periodic; ties go to the
    lower label id, i.e. ceiling < wall < floor)."""
    labels = labels.copy()
    if not unassigned.any():
        return labels
    pad = min(labels.shape[0], labels.shape[1] // 2)
    classes = (CEILING, WALL, FLOOR)
    dists = []
    for cls in classes:
        mask = (labels == cls) & ~unassigned
        wrapped = np.concatenate([mask[:, -pad:], mask, mask[:, :pad]], axis=1)
        d = ndimage.distance_transform_edt(~wrapped)[:, pad:-pad]
        dists.append(d)
    best = np.argmin(np.stack(dists), axis=0)  # first min wins ties
    labels[unassigned] = np.array(classes, dtype=labels.dtype)[best[unassigned]]
    return labels


def gen_semantic(layout: LayoutMap, grid: PanoramaGrid,
                 shape: RoomShape | None = None,
                 cam: CameraPose | None = None) -> SemanticMap:
    """Label the complement regions of the boundary raster.

    The region touching the top row is the ceiling, the one touching the
    bottom row is the floor, everything else is wall; boundary pixels are
    absorbed by periodic 3x3 closing.  When the shape and camera are given,
    wall openings are painted as door/window rectangles.
    """
    if layout.grid != grid:
        raise ValueError("layout raster is on a different grid")
    boundary = layout.data.astype(bool)
    lab, _ = _wrap_label(~boundary)
    ceiling_ids = set(np.unique(lab[0])) - {0}
    floor_ids = set(np.unique(lab[-1])) - {0}
    if ceiling_ids & floor_ids:
        raise DegenerateLayoutError(
            "ceiling and floor regions merge; layout raster is degenerate")
    out = np.full(grid.shape, WALL, dtype=np.uint8)
    out[np.isin(lab, sorted(ceiling_ids))] = CEILING
    out[np.isin(lab, sorted(floor_ids))] = FLOOR
    out = _absorb_boundary(out, boundary)

    if shape is not None and cam is not None and shape.openings:
        _paint_openings(out, shape, cam, grid)
    return SemanticMap(grid=grid, data=out)


def _paint_openings(out: np.ndarray, shape: RoomShape, cam: CameraPose,
                    grid: PanoramaGrid) -> None:
    _, _, cs, edge, off = _column_geometry(shape, cam, grid)
    a = pixel_elevation(grid, np.arange(grid.height))[:, None]
    tan_a = np.tan(a)
    z_above_floor = cs[None, :] * tan_a + cam.height
    wall_mask = out == WALL
    for op in shape.openings:
        wall_len = shape.wall_length(op.wall)
        along = off * wall_len
        col_ok = (edge == op.wall) & (along >= op.offset) & \
                 (along <= op.offset + op.width)
        z_ok = (z_above_floor >= op.sill) & (z_above_floor <= op.sill + op.height)
        mask = wall_mask & col_ok[None, :] & z_ok
        out[mask] = DOOR if op.kind == "door" else WINDOW


# ---------------------------------------------------------------------------
# 1-D layout encoding and metric
# ---------------------------------------------------------------------------

def encode_layout_1d(shape: RoomShape, cam: CameraPose, width: int) -> Layout1D:
    """Per-column v-coordinates of the ceiling-wall and floor-wall
    boundaries, computed in closed form from the wall distance."""
    grid = PanoramaGrid(width=width, height=width // 2)
    validate_camera(shape, cam)
    z_floor, z_ceil = _relative_heights(shape, cam)
    _, _, cs, _, _ = _column_geometry(shape, cam, grid)
    ceiling_v = np.arccos(z_ceil / np.sqrt(cs * cs + z_ceil * z_ceil)) / math.pi
    floor_v = np.arccos(z_floor / np.sqrt(cs * cs + z_floor * z_floor)) / math.pi
    return Layout1D(ceiling_v=ceiling_v, floor_v=floor_v)


def layout_1d_distance(a: Layout1D, b: Layout1D) -> float:
    """Squared L2 distance over all 2W boundary coordinates.

    Accumulated left to right (ceiling row first, then floor row) so the
    result is reproducible against a plain summation.
    """
    if a.ceiling_v.shape != b.ceiling_v.shape:
        raise ValueError("layout encodings have different widths")
    total = 0.0
    for av, bv in ((a.ceiling_v, b.ceiling_v), (a.floor_v, b.floor_v)):
        diff = av - bv
        for d in diff:
            total += float(d) * float(d)
    return total
