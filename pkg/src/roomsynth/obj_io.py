"""OBJ/MTL export and import for room meshes.

Coordinates are right-handed z-up by default; `y_up=True` writes the common
viewer convention (x, z, -y) instead.  Numbers are printed with 9
significant digits, so export followed by import reproduces vertex, uv, and
index data exactly at that precision.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .meshes import RoomMesh
from .panorama import TextureImage
from .raster_io import texture_from_png_bytes, texture_to_png_bytes

OBJ_NAME = "room.obj"
MTL_NAME = "room.mtl"
TEXTURE_NAME = "room_texture.png"
_MATERIAL = "room_surface"


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def round_trip_value(x: float) -> float:
    """The float a coordinate becomes after export and import."""
    return float(_fmt(x))


def export_mesh(mesh: RoomMesh, directory: str | Path, y_up: bool = False) -> list[Path]:
    """Write room.obj, room.mtl, and the texture PNG; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    verts = mesh.vertices
    if y_up:
        verts = np.column_stack([verts[:, 0], verts[:, 2], -verts[:, 1]])

    out = io.StringIO()
    out.write("# roomsynth textured room mesh\n")
    out.write(f"# axes: {'y-up (x, z, -y)' if y_up else 'z-up right-handed'}\n")
    out.write(f"mtllib {MTL_NAME}\n")
    for v in verts:
        out.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
    # one vt per triangle corner; OBJ indices are 1-based.  v is written
    # unflipped (origin top-left, matching the panorama raster) so the text
    # round-trip stays exact; viewers should flip the texture vertically.
    for tri_uv in mesh.uvs:
        for u, vv in tri_uv:
            out.write(f"vt {_fmt(u)} {_fmt(vv)}\n")

    # faces stay in mesh order so the import reproduces the triangle list
    # exactly; a group line is emitted whenever the surface tag changes
    out.write(f"usemtl {_MATERIAL}\n")
    prev_tag = None
    for t_idx, (tri, tag) in enumerate(zip(mesh.triangles, mesh.tags)):
        if tag != prev_tag:
            out.write(f"g {tag}\n")
            prev_tag = tag
        vt0 = 3 * t_idx + 1
        out.write("f {}/{} {}/{} {}/{}\n".format(
            tri[0] + 1, vt0, tri[1] + 1, vt0 + 1, tri[2] + 1, vt0 + 2))

    obj_path = directory / OBJ_NAME
    obj_path.write_text(out.getvalue())
    mtl_path = directory / MTL_NAME
    mtl_path.write_text(
        f"newmtl {_MATERIAL}\n"
        "Ka 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\n"
        f"map_Kd {TEXTURE_NAME}\n")
    paths = [obj_path, mtl_path]
    if mesh.texture is not None:
        tex_path = directory / TEXTURE_NAME
        tex_path.write_bytes(texture_to_png_bytes(mesh.texture))
        paths.append(tex_path)
    return paths


def import_mesh(path: str | Path, y_up: bool = False) -> RoomMesh:
    """Read a mesh written by export_mesh back into a RoomMesh."""
    path = Path(path)
    verts: list[tuple[float, float, float]] = []
    vts: list[tuple[float, float]] = []
    tris: list[tuple[int, int, int]] = []
    tri_vts: list[tuple[int, int, int]] = []
    tags: list[str] = []
    current_group = "default"
    mtllib = None
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
        elif parts[0] == "vt":
            vts.append((float(parts[1]), float(parts[2])))
        elif parts[0] == "g":
            current_group = parts[1] if len(parts) > 1 else "default"
        elif parts[0] == "mtllib":
            mtllib = parts[1]
        elif parts[0] == "f":
            if len(parts) != 4:
                raise ValueError("only triangle faces are supported")
            vi, ti = [], []
            for token in parts[1:]:
                fields = token.split("/")
                vi.append(int(fields[0]) - 1)
                ti.append(int(fields[1]) - 1 if len(fields) > 1 and fields[1] else -1)
            tris.append(tuple(vi))
            tri_vts.append(tuple(ti))
            tags.append(current_group)
    varr = np.asarray(verts)
    if y_up:
        varr = np.column_stack([varr[:, 0], -varr[:, 2], varr[:, 1]])
    uvs = np.zeros((len(tris), 3, 2))
    for t_idx, corner_vts in enumerate(tri_vts):
        for c, vt_idx in enumerate(corner_vts):
            if vt_idx >= 0:
                uvs[t_idx, c] = vts[vt_idx]
    texture = _load_texture(path.parent, mtllib)
    return RoomMesh(vertices=varr, triangles=np.asarray(tris, dtype=np.int64),
                    uvs=uvs, tags=tags, texture=texture)


def _load_texture(directory: Path, mtllib: str | None) -> TextureImage | None:
    if mtllib is None:
        return None
    mtl = directory / mtllib
    if not mtl.exists():
        return None
    for raw in mtl.read_text().splitlines():
        parts = raw.split()
        if parts and parts[0] == "map_Kd" and len(parts) > 1:
            tex = directory / parts[1]
            if tex.exists():
                return texture_from_png_bytes(tex.read_bytes())
    return None
