"""Texture description parsing and the procedural panorama texture backend.

The procedural generator paints each pixel according to its semantic label,
computing pattern fields from 3D positions reconstructed out of the depth
map.  All azimuth-dependent pattern terms use low integer harmonics of the
panorama azimuth, so the output wraps seamlessly by construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import ImageColor

from .panorama import (CEILING, DOOR, FLOOR, WALL, WINDOW, DepthMap,
                       SemanticMap, TextureImage)
from .projection import column_azimuths, pixel_elevation

PATTERNS = ("solid", "stripes", "planks", "tiles", "speckle")

_PATTERN_WORDS = {
    "solid": "solid", "plain": "solid", "painted": "solid",
    "stripe": "stripes", "stripes": "stripes", "striped": "stripes",
    "plank": "planks", "planks": "planks", "wood": "planks",
    "wooden": "planks", "parquet": "planks", "hardwood": "planks",
    "tile": "tiles", "tiles": "tiles", "tiled": "tiles",
    "speckle": "speckle", "speckled": "speckle", "terrazzo": "speckle",
}

_SURFACE_WORDS = {
    "wall": "walls", "walls": "walls",
    "ceiling": "ceiling", "ceilings": "ceiling",
    "floor": "floor", "floors": "floor", "flooring": "floor",
    "door": "door", "doors": "door",
    "window": "window", "windows": "window",
}

_SCALE_RE = re.compile(r"(\d+(?:\.\d+)?)\s*m\b")

_DEFAULT_SCALE = {"solid": 0.5, "stripes": 0.3, "planks": 0.8,
                  "tiles": 0.4, "speckle": 0.5}


@dataclass(frozen=True)
class SurfaceSpec:
    color: tuple[int, int, int]
    pattern: str = "solid"
    scale: float = 0.5
    secondary: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}")
        if self.scale <= 0:
            raise ValueError("pattern scale must be positive")


def _rgb(name: str) -> tuple[int, int, int]:
    return ImageColor.getrgb(name)[:3]


DEFAULT_SURFACES = {
    "floor": SurfaceSpec(color=_rgb("saddlebrown"), pattern="planks",
                         scale=_DEFAULT_SCALE["planks"]),
    "walls": SurfaceSpec(color=_rgb("lightgray")),
    "ceiling": SurfaceSpec(color=_rgb("white")),
    "door": SurfaceSpec(color=_rgb("peru")),
    "window": SurfaceSpec(color=_rgb("lightsteelblue")),
}


@dataclass(frozen=True)
class TextureSpec:
    surfaces: dict[str, SurfaceSpec] = field(default_factory=lambda: dict(DEFAULT_SURFACES))
    free_text: str = ""
    notes: tuple[str, ...] = ()


def _find_colors(words: list[str]) -> list[tuple[int, int, int]]:
    """CSS named colors in a word list; adjacent pairs like 'light blue' are
    joined first so they resolve to 'lightblue'."""
    found = []
    i = 0
    while i < len(words):
        if i + 1 < len(words):
            joined = words[i] + words[i + 1]
            try:
                found.append(_rgb(joined))
                i += 2
                continue
            except ValueError:
                pass
        try:
            found.append(_rgb(words[i]))
        except ValueError:
            pass
        i += 1
    return found


_COLORISH = re.compile(r"[a-z]+")


def parse_texture_spec(text: str, base: TextureSpec | None = None) -> TextureSpec:
    """Extract per-surface colors, patterns, and scales from free text.

    Unmentioned surfaces keep their defaults (brown plank floor, light gray
    walls, white ceiling), or the corresponding entries of `base` when a
    previous spec is being edited.  Unknown color words fall back to the
    surface default with a note; the raw text is preserved verbatim.
    """
    surfaces = dict(base.surfaces) if base is not None else dict(DEFAULT_SURFACES)
    notes: list[str] = []
    clauses = re.split(r"[,;]|\.(?!\d)| and | with ", text.lower())
    previous: list[str] = []
    for clause in clauses:
        words = _COLORISH.findall(clause)
        mentioned = [(_SURFACE_WORDS[w]) for w in words if w in _SURFACE_WORDS]
        if not mentioned:
            # attribute-only clause ("0.3m") extends the previous surfaces
            m = _SCALE_RE.search(clause)
            if m and previous:
                for surface in previous:
                    surfaces[surface] = replace(surfaces[surface],
                                                scale=float(m.group(1)))
            continue
        previous = mentioned
        colors = _find_colors([w for w in words if w not in _SURFACE_WORDS])
        pattern = None
        for w in words:
            if w in _PATTERN_WORDS:
                pattern = _PATTERN_WORDS[w]
                break
        m = _SCALE_RE.search(clause)
        scale = float(m.group(1)) if m else None
        for surface in mentioned:
            spec = surfaces[surface]
            if pattern is not None:
                spec = replace(spec, pattern=pattern,
                               scale=spec.scale if scale else _DEFAULT_SCALE[pattern])
            if colors:
                spec = replace(spec, color=colors[0],
                               secondary=colors[1] if len(colors) > 1 else spec.secondary)
            elif any(w not in _SURFACE_WORDS and w not in _PATTERN_WORDS
                     and len(w) > 3 for w in words) and pattern is None:
                notes.append(f"no recognized color for {surface!r}; keeping default")
            if scale is not None:
                spec = replace(spec, scale=scale)
            surfaces[surface] = spec
    return TextureSpec(surfaces=surfaces, free_text=text, notes=tuple(notes))


# ---------------------------------------------------------------------------
# Procedural generation
# ---------------------------------------------------------------------------

_LABEL_SURFACE = {CEILING: "ceiling", WALL: "walls", FLOOR: "floor",
                  DOOR: "door", WINDOW: "window"}


def _shade(spec: SurfaceSpec) -> np.ndarray:
    if spec.secondary is not None:
        return np.array(spec.secondary, dtype=np.float64)
    # darken the base color for the pattern's secondary phase
    return np.array(spec.color, dtype=np.float64) * 0.72


def _blend_field(pattern: str, scale: float, theta: np.ndarray, c1: np.ndarray,
                 rng: np.random.Generator) -> np.ndarray:
    """Pattern mix weight in [0, 1].  c1 is the non-wrapping surface
    coordinate (z on walls, plan radius on floor/ceiling); azimuth terms use
    low integer harmonics so column 0 continues column W-1."""
    if pattern == "solid":
        return np.zeros_like(theta)
    band = 2.0 * math.pi * c1 / scale
    if pattern == "stripes":
        return 0.5 + 0.5 * np.cos(band + rng.uniform(0, 2 * math.pi))
    if pattern == "planks":
        k = int(rng.integers(2, 5))
        band_idx = np.floor(c1 / scale)
        joint_phase = (band_idx * 2.399963) % (2 * math.pi)  # golden-angle offset
        joints = (0.5 + 0.5 * np.cos(k * theta + joint_phase)) ** 6
        rows = 0.30 * (0.5 + 0.5 * np.cos(band + rng.uniform(0, 2 * math.pi)))
        return np.clip(rows + 0.55 * joints, 0.0, 1.0)
    if pattern == "tiles":
        k = int(rng.integers(3, 6))
        g1 = (0.5 + 0.5 * np.cos(band + rng.uniform(0, 2 * math.pi))) ** 4
        g2 = (0.5 + 0.5 * np.cos(k * theta + rng.uniform(0, 2 * math.pi))) ** 4
        return np.clip(0.85 * (g1 + g2), 0.0, 1.0)
    if pattern == "speckle":
        out = np.zeros_like(theta)
        for _ in range(3):
            k = int(rng.integers(1, 6))
            p1 = rng.uniform(0, 2 * math.pi)
            p2 = rng.uniform(0, 2 * math.pi)
            f = rng.uniform(0.5, 2.0)
            out += np.cos(k * theta + p1) * np.cos(band * f + p2)
        return np.clip(0.5 + out / 4.0, 0.0, 1.0) * 0.6
    raise ValueError(pattern)


def gen_texture_procedural(semantic: SemanticMap, depth: DepthMap,
                           spec: TextureSpec, seed: int = 0) -> TextureImage:
    """Deterministic procedural panorama texture on the maps' shared grid."""
    if semantic.grid != depth.grid:
        raise ValueError("semantic and depth maps are on different grids")
    grid = semantic.grid
    h, w = grid.shape
    theta = column_azimuths(grid)[None, :]
    a = pixel_elevation(grid, np.arange(h))[:, None]
    sa, ca = np.sin(a), np.cos(a)
    d = depth.data
    z = d * sa
    r_plan = d * ca
    # broadcast azimuth to full rasters
    theta_full = np.broadcast_to(theta, (h, w))

    out = np.zeros((h, w, 3), dtype=np.float64)
    labels = semantic.data
    for label, surface in _LABEL_SURFACE.items():
        mask = labels == label
        if not mask.any():
            continue
        sspec = spec.surfaces.get(surface, DEFAULT_SURFACES[surface])
        rng = np.random.default_rng([seed, label])
        c1 = z if label in (WALL, DOOR, WINDOW) else r_plan
        blend = _blend_field(sspec.pattern, sspec.scale, theta_full, c1, rng)
        base = np.array(sspec.color, dtype=np.float64)
        second = _shade(sspec)
        pix = base[None, :] * (1.0 - blend[mask, None]) + second[None, :] * blend[mask, None]
        out[mask] = pix
    data = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return TextureImage(grid=grid, data=data)


def wrap_continuity_error(image: TextureImage) -> float:
    """Mean absolute per-channel difference between the last and first
    columns, on the 8-bit scale."""
    a = image.data[:, -1, :].astype(np.float64)
    b = image.data[:, 0, :].astype(np.float64)
    return float(np.mean(np.abs(a - b)))
