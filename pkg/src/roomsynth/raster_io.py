"""PNG (de)serialization for the panorama rasters.

Depth is written twice: a 16-bit single-channel PNG in millimeters for
interoperability, and a lossless .npy float sidecar that round-trips
exactly.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .panorama import DepthMap, LayoutMap, PanoramaGrid, SemanticMap, TextureImage


def _grid_for(arr: np.ndarray) -> PanoramaGrid:
    h, w = arr.shape[:2]
    return PanoramaGrid(width=w, height=h)


def layout_to_png_bytes(m: LayoutMap) -> bytes:
    buf = io.BytesIO()
    Image.fromarray((m.data * 255).astype(np.uint8), mode="L").save(buf, "PNG")
    return buf.getvalue()


def layout_from_png_bytes(data: bytes) -> LayoutMap:
    arr = np.asarray(Image.open(io.BytesIO(data)).convert("L"))
    return LayoutMap(grid=_grid_for(arr), data=(arr > 127).astype(np.uint8))


def semantic_to_png_bytes(m: SemanticMap) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(m.data.astype(np.uint8), mode="L").save(buf, "PNG")
    return buf.getvalue()


def semantic_from_png_bytes(data: bytes) -> SemanticMap:
    arr = np.asarray(Image.open(io.BytesIO(data)).convert("L")).astype(np.uint8)
    return SemanticMap(grid=_grid_for(arr), data=arr)


def texture_to_png_bytes(m: TextureImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(m.data, mode="RGB").save(buf, "PNG")
    return buf.getvalue()


def texture_from_png_bytes(data: bytes) -> TextureImage:
    arr = np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))
    return TextureImage(grid=_grid_for(arr), data=arr.copy())


def depth_to_png16_bytes(m: DepthMap) -> bytes:
    """16-bit millimeter PNG; values clip at the uint16 range (65.535 m)."""
    mm = np.clip(np.round(m.data * 1000.0), 0, 65535).astype(np.uint16)
    buf = io.BytesIO()
    Image.fromarray(mm, mode="I;16").save(buf, "PNG")
    return buf.getvalue()


def depth_to_npy_bytes(m: DepthMap) -> bytes:
    buf = io.BytesIO()
    np.save(buf, m.data)
    return buf.getvalue()


def depth_from_npy_bytes(data: bytes) -> DepthMap:
    arr = np.load(io.BytesIO(data))
    return DepthMap(grid=_grid_for(arr), data=arr)


def save_depth(m: DepthMap, path_png: str | Path, path_npy: str | Path) -> None:
    Path(path_png).write_bytes(depth_to_png16_bytes(m))
    Path(path_npy).write_bytes(depth_to_npy_bytes(m))
