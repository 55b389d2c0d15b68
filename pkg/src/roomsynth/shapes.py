"""Room geometry types: floor polygon with heights, wall openings, camera."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from shapely.geometry import Point, Polygon
from shapely.ops import polylabel

DEFAULT_CEILING = 2.8
DEFAULT_CAMERA_HEIGHT = 1.6


class ShapeError(ValueError):
    """Raised when a RoomShape violates its invariants."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True)
class Opening:
    """Door or window rectangle attached to one wall.

    Positions are measured along the wall from its first corner; sill is
    height above the floor.
    """
    wall: int
    offset: float
    width: float
    sill: float
    height: float
    kind: str = "door"  # door | window


@dataclass(frozen=True)
class RoomShape:
    floor_corners: tuple[tuple[float, float], ...]
    ceiling_height: float = DEFAULT_CEILING
    floor_z: float = 0.0
    openings: tuple[Opening, ...] = field(default_factory=tuple)

    @property
    def corners(self) -> np.ndarray:
        return np.asarray(self.floor_corners, dtype=np.float64)

    @property
    def edges(self) -> np.ndarray:
        """(K, 4) array of wall segments (x0, y0, x1, y1), CCW order."""
        c = self.corners
        n = np.roll(c, -1, axis=0)
        return np.concatenate([c, n], axis=1)

    def wall_length(self, i: int) -> float:
        e = self.edges[i]
        return math.hypot(e[2] - e[0], e[3] - e[1])

    def area(self) -> float:
        return abs(signed_area(self.corners))

    def plan_bbox(self) -> tuple[float, float, float, float]:
        c = self.corners
        return (c[:, 0].min(), c[:, 1].min(), c[:, 0].max(), c[:, 1].max())

    def diameter(self) -> float:
        xmin, ymin, xmax, ymax = self.plan_bbox()
        return math.hypot(xmax - xmin, ymax - ymin) + self.ceiling_height


@dataclass(frozen=True)
class CameraPose:
    position: tuple[float, float]
    height: float = DEFAULT_CAMERA_HEIGHT
    yaw: float = 0.0


def signed_area(corners: np.ndarray) -> float:
    x = corners[:, 0]
    y = corners[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(corners: np.ndarray, x: float, y: float,
                     eps: float = 1e-9) -> bool:
    """Even-odd rule point containment; points within eps of an edge count
    as inside."""
    poly = Polygon(corners)
    return poly.distance(Point(x, y)) <= eps if not poly.contains(Point(x, y)) else True


def validate_shape(shape: RoomShape) -> RoomShape:
    """Check all RoomShape invariants; returns the (possibly rewound) shape.

    Clockwise polygons are reversed with a warning.  All other violations
    raise ShapeError listing every problem found.
    """
    diags = []
    corners = shape.corners
    if len(corners) < 3:
        raise ShapeError(["fewer than 3 corners"])
    if shape.ceiling_height <= 0:
        diags.append("non-positive ceiling height")
    poly = Polygon(corners)
    if not poly.is_valid or poly.area == 0:
        diags.append("self-intersection: floor polygon is not simple")
    elif signed_area(corners) < 0:
        warnings.warn("clockwise floor polygon reversed to counter-clockwise",
                      stacklevel=2)
        shape = replace(shape, floor_corners=tuple(map(tuple, corners[::-1])))
        corners = shape.corners
    k = len(corners)
    for op in shape.openings:
        if not (0 <= op.wall < k):
            diags.append(f"opening wall index {op.wall} out of range")
            continue
        if op.kind not in ("door", "window"):
            diags.append(f"opening kind {op.kind!r} invalid")
        if op.width <= 0 or op.height <= 0:
            diags.append(f"opening on wall {op.wall} has non-positive size")
        if op.offset < 0 or op.offset + op.width > shape.wall_length(op.wall) + 1e-9:
            diags.append(f"opening on wall {op.wall} exceeds wall extent")
        if op.sill < 0 or op.sill + op.height > shape.ceiling_height + 1e-9:
            diags.append(f"opening on wall {op.wall} exceeds ceiling height")
    if diags:
        raise ShapeError(diags)
    return shape


def default_camera(shape: RoomShape, height: float = DEFAULT_CAMERA_HEIGHT,
                   yaw: float = 0.0) -> CameraPose:
    """Camera at the plan centroid, or at the pole of inaccessibility when
    the centroid falls outside a non-convex plan."""
    poly = Polygon(shape.corners)
    c = poly.centroid
    if not poly.contains(c):
        c = polylabel(poly, tolerance=1e-3)
    h = min(height, 0.9 * shape.ceiling_height)
    return CameraPose(position=(float(c.x), float(c.y)), height=h, yaw=yaw)


def validate_camera(shape: RoomShape, cam: CameraPose) -> None:
    if not Polygon(shape.corners).contains(Point(*cam.position)):
        raise ShapeError(["camera position outside floor polygon"])
    if not (0.0 < cam.height < shape.ceiling_height):
        raise ShapeError(["camera height outside (0, ceiling_height)"])


# --- plain-text serialization -------------------------------------------------
#
# room format, one key per line:
#   ceiling_height: 2.8
#   floor_z: 0.0
#   corner: 0.0 0.0
#   corner: 4.0 0.0
#   ...
#   opening: door wall=1 offset=0.5 width=0.9 sill=0.0 height=2.0

def serialize_shape(shape: RoomShape) -> str:
    lines = [f"ceiling_height: {shape.ceiling_height:.9g}",
             f"floor_z: {shape.floor_z:.9g}"]
    for x, y in shape.floor_corners:
        lines.append(f"corner: {x:.9g} {y:.9g}")
    for op in shape.openings:
        lines.append(f"opening: {op.kind} wall={op.wall} offset={op.offset:.9g} "
                     f"width={op.width:.9g} sill={op.sill:.9g} height={op.height:.9g}")
    return "\n".join(lines) + "\n"


def parse_shape(text: str) -> RoomShape:
    ceiling = DEFAULT_CEILING
    floor_z = 0.0
    corners = []
    openings = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ShapeError([f"line {lineno}: expected 'key: value'"])
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        try:
            if key == "ceiling_height":
                ceiling = float(rest)
            elif key == "floor_z":
                floor_z = float(rest)
            elif key == "corner":
                x, y = rest.split()
                corners.append((float(x), float(y)))
            elif key == "opening":
                parts = rest.split()
                kind = parts[0]
                kv = dict(p.split("=", 1) for p in parts[1:])
                openings.append(Opening(wall=int(kv["wall"]),
                                        offset=float(kv["offset"]),
                                        width=float(kv["width"]),
                                        sill=float(kv["sill"]),
                                        height=float(kv["height"]),
                                        kind=kind))
            else:
                raise ShapeError([f"line {lineno}: unknown key {key!r}"])
        except (ValueError, KeyError, IndexError) as exc:
            raise ShapeError([f"line {lineno}: malformed {key!r} entry: {exc}"]) from exc
    return validate_shape(RoomShape(floor_corners=tuple(corners),
                                    ceiling_height=ceiling, floor_z=floor_z,
                                    openings=tuple(openings)))
