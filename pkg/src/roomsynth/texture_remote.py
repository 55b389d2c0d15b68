"""HTTP texture backend speaking the panorama-image generation protocol.

Request: multipart/form-data POST with three PNG parts named "layout",
"depth", "semantic", a UTF-8 "text" field, and an integer "seed" field.
Response: a PNG image on the same grid as the inputs.  Responses failing
dimension or wrap-continuity validation are rejected, never returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import httpx

from .panorama import DepthMap, LayoutMap, SemanticMap, TextureImage
from .raster_io import (depth_to_png16_bytes, layout_to_png_bytes,
                        semantic_to_png_bytes, texture_from_png_bytes)
from .textures import wrap_continuity_error

WRAP_ERROR_LIMIT = 2.0  # 8-bit scale


class RemoteTextureError(RuntimeError):
    """Base class; subclasses identify the failure mode."""


class RemoteUnreachable(RemoteTextureError):
    pass


class RemoteTimeout(RemoteTextureError):
    pass


class MalformedResponse(RemoteTextureError):
    pass


class DimensionMismatch(MalformedResponse):
    pass


class WrapContinuityViolation(RemoteTextureError):
    pass


@dataclass(frozen=True)
class RemoteTextureBackend:
    endpoint: str
    timeout: float = 30.0

    def generate(self, layout: LayoutMap, depth: DepthMap,
                 semantic: SemanticMap, text: str, seed: int = 0
                 ) -> TextureImage:
        grid = layout.grid
        if depth.grid != grid or semantic.grid != grid:
            raise ValueError("maps are on different grids")
        files = {
            "layout": ("layout.png", layout_to_png_bytes(layout), "image/png"),
            "depth": ("depth.png", depth_to_png16_bytes(depth), "image/png"),
            "semantic": ("semantic.png", semantic_to_png_bytes(semantic),
                         "image/png"),
        }
        data = {"text": text, "seed": str(seed)}
        try:
            resp = httpx.post(self.endpoint, files=files, data=data,
                              timeout=self.timeout)
        except httpx.TimeoutException as exc:
            raise RemoteTimeout(f"texture service timed out: {exc}") from exc
        except httpx.HTTPError as exc:
            raise RemoteUnreachable(f"texture service unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise MalformedResponse(f"texture service returned HTTP "
                                    f"{resp.status_code}")
        try:
            image = texture_from_png_bytes(resp.content)
        except Exception as exc:
            raise MalformedResponse(f"response is not a decodable PNG: {exc}") from exc
        if image.grid != grid:
            raise DimensionMismatch(
                f"expected {grid.width}x{grid.height}, got "
                f"{image.grid.width}x{image.grid.height}")
        err = wrap_continuity_error(image)
        if err > WRAP_ERROR_LIMIT:
            raise WrapContinuityViolation(
                f"seam error {err:.2f} exceeds limit {WRAP_ERROR_LIMIT}")
        return image
