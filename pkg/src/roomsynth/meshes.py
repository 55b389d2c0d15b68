"""Textured room mesh construction from an exact room shape.

Walls become vertical quad grids subdivided in azimuth and height;
floor and ceiling are ear-clipped, given a Steiner vertex under the camera
axis, and refined by conforming edge bisection until no edge spans more
than the subdivision limit in azimuth or elevation.  Every vertex carries
panorama UVs from its spherical projection; triangles crossing the u-seam
are split with duplicated seam vertices at u = 0 and u = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .panorama import TextureImage
from .shapes import CameraPose, RoomShape, validate_camera, validate_shape

_EPS = 1e-9
_POLE_EPS = 1e-12


def tag_sort_key(tag: str):
    """Canonical surface order: floor, ceiling, then walls by index."""
    if tag.startswith("wall_"):
        return (2, int(tag.split("_", 1)[1]))
    return (0 if tag == "floor" else 1, 0)


@dataclass
class RoomMesh:
    vertices: np.ndarray          # (N, 3) float64, meters
    triangles: np.ndarray         # (M, 3) int64
    uvs: np.ndarray               # (M, 3, 2) float64 per-corner (u, v)
    tags: list[str]               # per triangle: floor | ceiling | wall_i
    texture: TextureImage | None = None

    def surface_tags(self) -> set[str]:
        return set(self.tags)

    def plan_bbox(self) -> tuple[float, float, float, float]:
        v = self.vertices
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    def z_extent(self) -> tuple[float, float]:
        return float(self.vertices[:, 2].min()), float(self.vertices[:, 2].max())


# ---------------------------------------------------------------------------
# ear clipping
# ---------------------------------------------------------------------------

def ear_clip(points: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a simple CCW polygon; robust to collinear vertices."""
    n = len(points)
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3 and guard < 10 * n * n:
        guard += 1
        ear_found = False
        for k in range(len(idx)):
            i0, i1, i2 = (idx[(k - 1) % len(idx)], idx[k],
                          idx[(k + 1) % len(idx)])
            a, b, c = points[i0], points[i1], points[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= _EPS:
                continue  # reflex or collinear corner
            if any(_point_in_tri(points[j], a, b, c) for j in idx
                   if j not in (i0, i1, i2)):
                continue
            tris.append((i0, i1, i2))
            idx.pop(k)
            ear_found = True
            break
        if not ear_found:
            raise ValueError("ear clipping failed; polygon may be degenerate")
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def _point_in_tri(p, a, b, c) -> bool:
    d1 = (p[0] - b[0]) * (a[1] - b[1]) - (a[0] - b[0]) * (p[1] - b[1])
    d2 = (p[0] - c[0]) * (b[1] - c[1]) - (b[0] - c[0]) * (p[1] - c[1])
    d3 = (p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])
    neg = (d1 < -_EPS) or (d2 < -_EPS) or (d3 < -_EPS)
    pos = (d1 > _EPS) or (d2 > _EPS) or (d3 > _EPS)
    return not (neg and pos)


# ---------------------------------------------------------------------------
# floor/ceiling triangulation with pole vertex and conforming refinement
# ---------------------------------------------------------------------------

class _PlanMesh:
    def __init__(self, points2d: list[tuple[float, float]],
                 tris: list[tuple[int, int, int]]):
        self.pts = [tuple(map(float, p)) for p in points2d]
        self.tris = list(tris)

    def insert_point(self, p: tuple[float, float]) -> None:
        """Insert p as a vertex, splitting the containing triangle (1->3) or,
        when p lies on a shared edge, the adjacent triangles (each 1->2)."""
        for vi, q in enumerate(self.pts):
            if abs(q[0] - p[0]) < _POLE_EPS and abs(q[1] - p[1]) < _POLE_EPS:
                return
        # on-edge case first
        for ti, (i0, i1, i2) in enumerate(list(self.tris)):
            for (a, b), opp in (((i0, i1), i2), ((i1, i2), i0), ((i2, i0), i1)):
                if _on_segment(p, self.pts[a], self.pts[b]):
                    vi = self._add_point(p)
                    self._split_edge(a, b, vi)
                    return
        for ti, (i0, i1, i2) in enumerate(self.tris):
            if _point_in_tri(p, self.pts[i0], self.pts[i1], self.pts[i2]):
                vi = self._add_point(p)
                self.tris[ti] = (i0, i1, vi)
                self.tris.append((i1, i2, vi))
                self.tris.append((i2, i0, vi))
                return
        raise ValueError("point to insert lies outside the triangulation")

    def _add_point(self, p) -> int:
        self.pts.append((float(p[0]), float(p[1])))
        return len(self.pts) - 1

    def _split_edge(self, a: int, b: int, vi: int) -> None:
        """Bisect every triangle containing edge (a, b) at vertex vi."""
        new_tris = []
        for (i0, i1, i2) in self.tris:
            tri = (i0, i1, i2)
            if a in tri and b in tri:
                opp = next(v for v in tri if v not in (a, b))
                # preserve winding
                order = list(tri)
                ia, ib = order.index(a), order.index(b)
                if (ia + 1) % 3 == ib:
                    new_tris.append((a, vi, opp))
                    new_tris.append((vi, b, opp))
                else:
                    new_tris.append((b, vi, opp))
                    new_tris.append((vi, a, opp))
            else:
                new_tris.append(tri)
        self.tris = new_tris

    def refine(self, over_limit) -> None:
        """Conforming refinement: each pass splits every edge violating the
        span predicate at its midpoint and subdivides incident triangles
        (1, 2, or 3 split edges per triangle), repeating until clean.  The
        split set is decided per edge globally, so neighbors always agree
        and no T-junctions appear."""
        for _ in range(64):
            split: dict[tuple[int, int], int] = {}
            for tri in self.tris:
                for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                    key = (min(a, b), max(a, b))
                    if key not in split and over_limit(self.pts[a], self.pts[b]):
                        pa, pb = self.pts[a], self.pts[b]
                        split[key] = self._add_point(
                            ((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0))
            if not split:
                return
            new_tris = []
            for (a, b, c) in self.tris:
                mab = split.get((min(a, b), max(a, b)))
                mbc = split.get((min(b, c), max(b, c)))
                mca = split.get((min(c, a), max(c, a)))
                n_split = sum(m is not None for m in (mab, mbc, mca))
                if n_split == 0:
                    new_tris.append((a, b, c))
                elif n_split == 3:
                    new_tris += [(a, mab, mca), (mab, b, mbc),
                                 (mca, mbc, c), (mab, mbc, mca)]
                elif n_split == 1:
                    # rotate so the split edge is (a, b)
                    if mbc is not None:
                        a, b, c, mab = b, c, a, mbc
                    elif mca is not None:
                        a, b, c, mab = c, a, b, mca
                    new_tris += [(a, mab, c), (mab, b, c)]
                else:
                    # rotate so the unsplit edge is (c, a)
                    if mab is None:
                        a, b, c, mab, mbc = b, c, a, mbc, mca
                    elif mbc is None:
                        a, b, c, mab, mbc = c, a, b, mca, mab
                    new_tris += [(mab, b, mbc), (a, mab, mbc), (a, mbc, c)]
            self.tris = new_tris
        raise RuntimeError("refinement did not converge")


def _on_segment(p, a, b, eps=_POLE_EPS) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if abs(cross) > 1e-9:
        return False
    dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])
    ll = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
    return eps < dot < ll - eps


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def wall_grid_counts(shape: RoomShape, cam: CameraPose, wall: int,
                     subdivision_deg: float = 5.0) -> tuple[int, int]:
    """(columns, rows) of the wall quad grid; documented closed form:
    columns = ceil(azimuth span / limit), rows = ceil(height / (limit_rad *
    nearest plan distance))."""
    limit = math.radians(subdivision_deg)
    e = shape.edges[wall]
    ox, oy = cam.position
    ta = math.atan2(e[0] - ox, e[1] - oy)
    tb = math.atan2(e[2] - ox, e[3] - oy)
    span = abs(_wrap_pi(tb - ta))
    n_cols = max(1, math.ceil(span / limit - 1e-12))
    d_min = _dist_point_segment_2d((ox, oy), (e[0], e[1]), (e[2], e[3]))
    n_rows = max(1, math.ceil(shape.ceiling_height / (limit * d_min) - 1e-12))
    return n_cols, n_rows


def _wrap_pi(t: float) -> float:
    while t > math.pi:
        t -= 2 * math.pi
    while t <= -math.pi:
        t += 2 * math.pi
    return t


def _dist_point_segment_2d(p, a, b) -> float:
    vx, vy = b[0] - a[0], b[1] - a[1]
    denom = vx * vx + vy * vy
    t = 0.0 if denom == 0 else max(0.0, min(1.0, ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / denom))
    return math.hypot(p[0] - (a[0] + t * vx), p[1] - (a[1] + t * vy))


class _MeshBuilder:
    def __init__(self, cam_center: np.ndarray):
        self.cam = cam_center
        self.verts: list[tuple[float, float, float]] = []
        self.vmap: dict = {}
        self.tris: list[tuple[int, int, int]] = []
        self.tags: list[str] = []

    def add_vertex(self, p) -> int:
        key = (round(p[0], 12), round(p[1], 12), round(p[2], 12))
        if key in self.vmap:
            return self.vmap[key]
        self.verts.append((float(p[0]), float(p[1]), float(p[2])))
        self.vmap[key] = len(self.verts) - 1
        return self.vmap[key]

    def add_triangle(self, i0, i1, i2, tag) -> None:
        self.tris.append((i0, i1, i2))
        self.tags.append(tag)


def build_empty_room(shape: RoomShape, cam: CameraPose, texture: TextureImage,
                     subdivision_deg: float = 5.0) -> RoomMesh:
    """Build the textured room mesh by projecting every vertex through the
    panorama camera."""
    shape = validate_shape(shape)
    validate_camera(shape, cam)
    for i in range(len(shape.floor_corners)):
        if shape.wall_length(i) < _EPS:
            raise ValueError(f"wall {i} has zero length")
    limit = math.radians(subdivision_deg)
    ox, oy = cam.position
    z0 = shape.floor_z
    z1 = shape.floor_z + shape.ceiling_height
    cam_center = np.array([ox, oy, z0 + cam.height])
    b = _MeshBuilder(cam_center)

    _build_walls(b, shape, cam, subdivision_deg)
    _build_cap(b, shape, cam_center, z0, limit, "floor")
    _build_cap(b, shape, cam_center, z1, limit, "ceiling")

    verts = np.asarray(b.verts)
    tris = np.asarray(b.tris, dtype=np.int64)
    tags = b.tags
    verts, tris, tags, uvs = _split_seam_and_uv(verts, tris, tags, cam_center)
    tris, uvs = _orient_inward(verts, tris, uvs, cam_center)
    order = sorted(range(len(tags)), key=lambda i: (tag_sort_key(tags[i]), i))
    return RoomMesh(vertices=verts, triangles=tris[order], uvs=uvs[order],
                    tags=[tags[i] for i in order], texture=texture)


def _build_walls(b: _MeshBuilder, shape: RoomShape, cam: CameraPose,
                 subdivision_deg: float) -> None:
    ox, oy = cam.position
    z0 = shape.floor_z
    dz = shape.ceiling_height
    for i, e in enumerate(shape.edges):
        n_cols, n_rows = wall_grid_counts(shape, cam, i, subdivision_deg)
        ax, ay, bx, by = e
        ta = math.atan2(ax - ox, ay - oy)
        span = _wrap_pi(math.atan2(bx - ox, by - oy) - ta)
        grid = np.empty((n_cols + 1, n_rows + 1), dtype=np.int64)
        for j in range(n_cols + 1):
            if j == 0:
                px, py = ax, ay
            elif j == n_cols:
                px, py = bx, by
            else:
                t = ta + span * j / n_cols
                s = _ray_line_param((ox, oy), t, (ax, ay), (bx, by))
                px, py = ax + s * (bx - ax), ay + s * (by - ay)
            for k in range(n_rows + 1):
                z = z0 + dz * k / n_rows
                grid[j, k] = b.add_vertex((px, py, z))
        for j in range(n_cols):
            for k in range(n_rows):
                v00, v01 = grid[j, k], grid[j, k + 1]
                v10, v11 = grid[j + 1, k], grid[j + 1, k + 1]
                b.add_triangle(v00, v10, v11, f"wall_{i}")
                b.add_triangle(v00, v11, v01, f"wall_{i}")


def _ray_line_param(origin, theta, a, b) -> float:
    dx, dy = math.sin(theta), math.cos(theta)
    ex, ey = b[0] - a[0], b[1] - a[1]
    denom = dx * ey - dy * ex
    rx, ry = a[0] - origin[0], a[1] - origin[1]
    return (rx * dy - ry * dx) / denom


def _build_cap(b: _MeshBuilder, shape: RoomShape, cam_center, z: float,
               limit: float, tag: str) -> None:
    pts = [tuple(p) for p in shape.floor_corners]
    tris = ear_clip(np.asarray(pts))
    pm = _PlanMesh(pts, tris)
    pm.insert_point((float(cam_center[0]), float(cam_center[1])))

    def over_limit(pa, pb):
        return _edge_span_exceeds(pa, pb, z, cam_center, limit)

    pm.refine(over_limit)
    index = [b.add_vertex((p[0], p[1], z)) for p in pm.pts]
    for (i0, i1, i2) in pm.tris:
        b.add_triangle(index[i0], index[i1], index[i2], tag)


def _edge_span_exceeds(pa, pb, z, cam_center, limit) -> bool:
    ax, ay = pa[0] - cam_center[0], pa[1] - cam_center[1]
    bx, by = pb[0] - cam_center[0], pb[1] - cam_center[1]
    dz = z - cam_center[2]
    pole_a = abs(ax) < _POLE_EPS and abs(ay) < _POLE_EPS
    pole_b = abs(bx) < _POLE_EPS and abs(by) < _POLE_EPS
    if not (pole_a or pole_b):
        dazim = abs(_wrap_pi(math.atan2(bx, by) - math.atan2(ax, ay)))
        if dazim > limit:
            return True
    ea = math.atan2(dz, math.hypot(ax, ay))
    eb = math.atan2(dz, math.hypot(bx, by))
    return abs(ea - eb) > limit


# ---------------------------------------------------------------------------
# seam splitting and UV assignment
# ---------------------------------------------------------------------------

def _split_seam_and_uv(verts, tris, tags, cam_center):
    rel = verts - cam_center
    out_tris: list[tuple[int, int, int]] = []
    out_tags: list[str] = []
    out_uv: list[list] = []
    new_verts = [tuple(v) for v in verts]
    seam_cache: dict = {}

    def seam_point(i, j) -> int:
        key = (min(i, j), max(i, j))
        if key in seam_cache:
            return seam_cache[key]
        a, b = np.asarray(new_verts[i]), np.asarray(new_verts[j])
        xa = a[0] - cam_center[0]
        xb = b[0] - cam_center[0]
        t = xa / (xa - xb)
        p = a + t * (b - a)
        p[0] = cam_center[0]  # exactly on the seam plane
        new_verts.append(tuple(p))
        seam_cache[key] = len(new_verts) - 1
        return seam_cache[key]

    for (i0, i1, i2), tag in zip(tris, tags):
        ids = [int(i0), int(i1), int(i2)]
        xs = [rel[i][0] for i in ids]
        ys = [rel[i][1] for i in ids]
        poles = [abs(rel[i][0]) < _POLE_EPS and abs(rel[i][1]) < _POLE_EPS
                 for i in ids]
        crossing = (any(x > _POLE_EPS for x in xs)
                    and any(x < -_POLE_EPS for x in xs)
                    and any(not p and y < -_POLE_EPS
                            for y, p in zip(ys, poles)))
        if not crossing:
            out_tris.append(tuple(ids))
            out_tags.append(tag)
            out_uv.append(None)
            continue
        pos_poly, neg_poly = [], []
        n = 3
        for k in range(n):
            i, j = ids[k], ids[(k + 1) % n]
            xi = new_verts[i][0] - cam_center[0]
            xj = new_verts[j][0] - cam_center[0]
            side_i = 0 if abs(xi) <= _POLE_EPS else (1 if xi > 0 else -1)
            side_j = 0 if abs(xj) <= _POLE_EPS else (1 if xj > 0 else -1)
            if side_i >= 0:
                pos_poly.append(i)
            if side_i <= 0:
                neg_poly.append(i)
            if side_i * side_j < 0:
                m = seam_point(i, j)
                pos_poly.append(m)
                neg_poly.append(m)
        for poly, side in ((pos_poly, "pos"), (neg_poly, "neg")):
            for k in range(1, len(poly) - 1):
                out_tris.append((poly[0], poly[k], poly[k + 1]))
                out_tags.append(tag)
                out_uv.append(side)

    verts = np.asarray(new_verts)
    rel = verts - cam_center
    uvs = np.zeros((len(out_tris), 3, 2))
    for t_idx, (tri, side) in enumerate(zip(out_tris, out_uv)):
        pole_corners = []
        for c, vi in enumerate(tri):
            x, y, z = rel[vi]
            r = math.sqrt(x * x + y * y + z * z)
            if abs(x) < _POLE_EPS and abs(y) < _POLE_EPS:
                pole_corners.append(c)
                uvs[t_idx, c] = (0.0, 0.0 if z > 0 else 1.0)
                continue
            if side is not None and abs(x) <= _POLE_EPS and y < 0:
                u = 1.0 if side == "pos" else 0.0
            else:
                u = (math.atan2(x, y) + math.pi) / (2 * math.pi)
            v = math.acos(max(-1.0, min(1.0, z / r))) / math.pi
            uvs[t_idx, c] = (u, v)
        non_pole = [k for k in range(3) if k not in pole_corners]
        # vertices landing numerically on the seam plane get u from atan2's
        # choice of +-pi; when the rest of the triangle sits on the other end
        # of the image, unwrap such corners to the triangle's side
        us = [uvs[t_idx, k, 0] for k in non_pole]
        if us and max(us) - min(us) > 0.5:
            on_seam = [abs(rel[tri[k]][0]) <= _POLE_EPS and rel[tri[k]][1] < 0
                       for k in non_pole]
            off = [u for u, s in zip(us, on_seam) if not s]
            if off:
                majority_high = sum(off) / len(off) > 0.5
                for k, s in zip(non_pole, on_seam):
                    if not s:
                        continue
                    u = uvs[t_idx, k, 0]
                    if majority_high and u < 0.5:
                        uvs[t_idx, k, 0] = min(1.0, u + 1.0)
                    elif not majority_high and u > 0.5:
                        uvs[t_idx, k, 0] = max(0.0, u - 1.0)
        for c in pole_corners:
            others = [uvs[t_idx, k, 0] for k in non_pole]
            if others:
                uvs[t_idx, c, 0] = sum(others) / len(others)
    return verts, np.asarray(out_tris, dtype=np.int64), out_tags, uvs


def _orient_inward(verts, tris, uvs, cam_center):
    """Flip triangles so normals point toward the camera (into the room)."""
    a = verts[tris[:, 0]]
    bb = verts[tris[:, 1]]
    c = verts[tris[:, 2]]
    n = np.cross(bb - a, c - a)
    toward = cam_center - (a + bb + c) / 3.0
    flip = np.einsum("ij,ij->i", n, toward) < 0
    tris = tris.copy()
    uvs = uvs.copy()
    tris[flip] = tris[flip][:, ::-1]
    uvs[flip] = uvs[flip][:, ::-1]
    return tris, uvs


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def scale_mesh(mesh: RoomMesh, plan: tuple[float, float] | None = None,
               height: float | None = None) -> RoomMesh:
    """Anisotropic scale about the plan bbox center and floor level so the
    axis-aligned plan bounding box and height match the targets."""
    xmin, ymin, xmax, ymax = mesh.plan_bbox()
    zmin, zmax = mesh.z_extent()
    targets = [None, None, None]
    current = [xmax - xmin, ymax - ymin, zmax - zmin]
    if plan is not None:
        targets[0], targets[1] = plan
    if height is not None:
        targets[2] = height
    for t in targets:
        if t is not None and t <= 0:
            raise ValueError("scale targets must be positive")
    if all(t is None or t == c for t, c in zip(targets, current)):
        return RoomMesh(vertices=mesh.vertices.copy(),
                        triangles=mesh.triangles.copy(), uvs=mesh.uvs.copy(),
                        tags=list(mesh.tags), texture=mesh.texture)
    mins = np.array([xmin, ymin, zmin])
    cx, cy = (xmin + xmax) / 2.0, (ymin + ymax) / 2.0
    verts = mesh.vertices.copy()
    for axis, (t, cur) in enumerate(zip(targets, current)):
        if t is None or t == cur:
            continue
        unit = (verts[:, axis] - mins[axis]) / cur
        if axis == 2:
            new_min = zmin  # floor stays put
        else:
            center = cx if axis == 0 else cy
            new_min = center - t / 2.0
        verts[:, axis] = new_min + unit * t
    return RoomMesh(vertices=verts, triangles=mesh.triangles.copy(),
                    uvs=mesh.uvs.copy(), tags=list(mesh.tags),
                    texture=mesh.texture)
