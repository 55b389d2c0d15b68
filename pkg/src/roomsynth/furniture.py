"""Furniture layouts in the CSS stanza format, containment checks, and the
merge of a furniture layout into a room mesh.

One stanza per item:

    bed-0 { length: 2.10m; width: 1.60m; height: 1.00m;
            left: 2.00m; top: 1.20m; orientation: 90deg; }

`left`/`top` locate the footprint center in room plan coordinates.  A
leading `/* room-extents: xmin ymin xmax ymax */` comment records the plan
bounding box the layout was authored for.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

_EPS = 1e-9


class CssError(ValueError):
    pass


@dataclass(frozen=True)
class FurnitureItem:
    category: str
    index: int
    length: float
    width: float
    height: float
    left: float
    top: float
    orientation: float = 0.0

    def __post_init__(self):
        for name in ("length", "width", "height"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.orientation < 360.0:
            object.__setattr__(self, "orientation", self.orientation % 360.0)

    @property
    def selector(self) -> str:
        return f"{self.category}-{self.index}"

    def footprint_corners(self) -> np.ndarray:
        """The 4 plan corners of the oriented footprint rectangle."""
        a = math.radians(self.orientation)
        ca, sa = math.cos(a), math.sin(a)
        hx, hy = self.length / 2.0, self.width / 2.0
        corners = []
        for sx, sy in ((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)):
            corners.append((self.left + sx * ca - sy * sa,
                            self.top + sx * sa + sy * ca))
        return np.asarray(corners)


@dataclass(frozen=True)
class FurnitureLayout:
    items: tuple[FurnitureItem, ...]
    room_extents: tuple[float, float, float, float]

    def __post_init__(self):
        seen = set()
        for it in self.items:
            if it.selector in seen:
                raise ValueError(f"duplicate item {it.selector}")
            seen.add(it.selector)
        object.__setattr__(self, "items", tuple(self.items))

    def find(self, category: str, index: int | None = None):
        hits = [it for it in self.items
                if it.category == category and (index is None or it.index == index)]
        return hits


_EXTENTS_RE = re.compile(
    r"/\*\s*room-extents:\s*([-\d.eE\s]+?)\s*\*/")
_SELECTOR_RE = re.compile(r"([A-Za-z][A-Za-z0-9_]*)-(\d+)\s*\{")
_PROP_RE = re.compile(r"([a-z]+)\s*:\s*(-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)"
                      r"\s*(m|deg)?\s*;")

_PROPS = ("length", "width", "height", "left", "top", "orientation")
_REQUIRED = ("length", "width", "height", "left", "top")


def parse_furniture_css(text: str) -> FurnitureLayout:
    extents = None
    m = _EXTENTS_RE.search(text)
    if m:
        nums = [float(x) for x in m.group(1).split()]
        if len(nums) != 4:
            raise CssError("room-extents needs 4 numbers")
        extents = tuple(nums)
    body = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    items = []
    seen = set()
    pos = 0
    while True:
        m = _SELECTOR_RE.search(body, pos)
        if m is None:
            if body[pos:].strip():
                raise CssError(f"unparsed text near: {body[pos:].strip()[:40]!r}")
            break
        if body[pos:m.start()].strip():
            raise CssError(f"unparsed text near: {body[pos:m.start()].strip()[:40]!r}")
        category, index = m.group(1).lower(), int(m.group(2))
        if (category, index) in seen:
            raise CssError(f"duplicate selector {category}-{index}")
        seen.add((category, index))
        end = body.find("}", m.end())
        if end < 0:
            raise CssError(f"unterminated stanza {category}-{index}")
        stanza = body[m.end():end]
        props: dict[str, float] = {}
        consumed = 0
        for pm in _PROP_RE.finditer(stanza):
            if stanza[consumed:pm.start()].strip():
                raise CssError(f"bad property text in {category}-{index}: "
                               f"{stanza[consumed:pm.start()].strip()[:40]!r}")
            consumed = pm.end()
            name, value, unit = pm.group(1), float(pm.group(2)), pm.group(3)
            if name not in _PROPS:
                raise CssError(f"unknown property {name!r} in {category}-{index}")
            if name in props:
                raise CssError(f"repeated property {name!r} in {category}-{index}")
            want_unit = "deg" if name == "orientation" else "m"
            if unit is not None and unit != want_unit:
                raise CssError(f"property {name!r} expects unit {want_unit}")
            props[name] = value
        if stanza[consumed:].strip():
            raise CssError(f"bad property text in {category}-{index}: "
                           f"{stanza[consumed:].strip()[:40]!r}")
        for name in _REQUIRED:
            if name not in props:
                raise CssError(f"{category}-{index} is missing required "
                               f"property {name!r}")
        items.append(FurnitureItem(category=category, index=index, **props))
        pos = end + 1
    if extents is None:
        extents = _footprint_bbox(items)
    return FurnitureLayout(items=tuple(items), room_extents=extents)


def _footprint_bbox(items) -> tuple[float, float, float, float]:
    if not items:
        return (0.0, 0.0, 0.0, 0.0)
    corners = np.vstack([it.footprint_corners() for it in items])
    return (float(corners[:, 0].min()), float(corners[:, 1].min()),
            float(corners[:, 0].max()), float(corners[:, 1].max()))


def _num(x: float) -> str:
    return format(float(x), ".9g")


def serialize_furniture_css(layout: FurnitureLayout) -> str:
    """Canonical form: items sorted by (category, index), fixed property
    order, one property per line."""
    out = ["/* room-extents: {} {} {} {} */".format(
        *(_num(v) for v in layout.room_extents))]
    for it in sorted(layout.items, key=lambda i: (i.category, i.index)):
        out.append(f"{it.selector} {{")
        for name in _PROPS:
            unit = "deg" if name == "orientation" else "m"
            out.append(f"  {name}: {_num(getattr(it, name))}{unit};")
        out.append("}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# containment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str            # out-of-room | overlap
    selector: str
    other: str | None = None
    detail: str = ""


def point_in_polygon(p, corners, eps: float = _EPS) -> bool:
    """Even-odd rule; points within eps of an edge count as inside."""
    x, y = p
    n = len(corners)
    inside = False
    for i in range(n):
        ax, ay = corners[i]
        bx, by = corners[(i + 1) % n]
        # on-edge tolerance
        ex, ey = bx - ax, by - ay
        ll = ex * ex + ey * ey
        if ll > 0:
            t = max(0.0, min(1.0, ((x - ax) * ex + (y - ay) * ey) / ll))
            if math.hypot(x - (ax + t * ex), y - (ay + t * ey)) <= eps:
                return True
        if (ay > y) != (by > y):
            xi = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < xi:
                inside = not inside
    return inside


def _rects_overlap(a: np.ndarray, b: np.ndarray, eps: float = _EPS) -> bool:
    """Separating-axis test for two convex quads."""
    for quad in (a, b):
        for i in range(4):
            ex, ey = quad[(i + 1) % 4] - quad[i]
            nx, ny = -ey, ex
            pa = a @ (nx, ny)
            pb = b @ (nx, ny)
            if pa.max() <= pb.min() + eps or pb.max() <= pa.min() + eps:
                return False
    return True


def containment_report(shape, layout: FurnitureLayout) -> list[Violation]:
    """Out-of-room footprint corners and pairwise footprint overlaps."""
    poly = [tuple(map(float, c)) for c in shape.floor_corners]
    out: list[Violation] = []
    feet = [(it, it.footprint_corners()) for it in layout.items]
    for it, corners in feet:
        for cx, cy in corners:
            if not point_in_polygon((cx, cy), poly):
                out.append(Violation(kind="out-of-room", selector=it.selector,
                                     detail=f"corner ({cx:.3f}, {cy:.3f}) "
                                            "outside the room"))
                break
    for i in range(len(feet)):
        for j in range(i + 1, len(feet)):
            if _rects_overlap(feet[i][1], feet[j][1]):
                out.append(Violation(kind="overlap", selector=feet[i][0].selector,
                                     other=feet[j][0].selector,
                                     detail="footprints overlap"))
    return out


def drop_uncontained(shape, layout: FurnitureLayout) -> FurnitureLayout:
    """Remove items with out-of-room corners, warning per dropped item."""
    bad = {v.selector for v in containment_report(shape, layout)
           if v.kind == "out-of-room"}
    if not bad:
        return layout
    for sel in sorted(bad):
        warnings.warn(f"dropping {sel}: footprint leaves the room")
    return FurnitureLayout(items=tuple(it for it in layout.items
                                       if it.selector not in bad),
                           room_extents=layout.room_extents)


# ---------------------------------------------------------------------------
# assets and merge
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssetManifest:
    entries: dict[str, tuple[str, tuple[float, float, float]]]

    def asset(self, category: str):
        if category not in self.entries:
            raise KeyError(f"category {category!r} missing from the asset "
                           "manifest")
        return self.entries[category]

    def canonical_dims(self, category: str) -> tuple[float, float, float]:
        return self.asset(category)[1]


def parse_manifest(text: str) -> AssetManifest:
    entries = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, rest = line.split(":", 1)
        parts = rest.split()
        if len(parts) != 4:
            raise ValueError(f"manifest line for {name!r} needs file + 3 dims")
        entries[name.strip()] = (parts[0],
                                 (float(parts[1]), float(parts[2]),
                                  float(parts[3])))
    return AssetManifest(entries=entries)


@dataclass(frozen=True)
class Placement:
    selector: str
    asset: str
    scale: tuple[float, float, float]
    rotation_deg: float
    translation: tuple[float, float, float]


@dataclass(frozen=True)
class Scene:
    room: object            # RoomMesh
    placements: tuple[Placement, ...]

    def __post_init__(self):
        for p in self.placements:
            if min(p.scale) <= 0:
                raise ValueError(f"degenerate transform for {p.selector}")


def merge(room, layout: FurnitureLayout, assets: AssetManifest) -> Scene:
    """Align layout and room centers, then place each item's asset.

    Assets are canonical boxes spanning [-1/2, 1/2]^2 in plan and [0, 1] in
    height, so a placement scales to the item's dimensions, rotates about
    vertical, and seats the base on the floor.
    """
    xmin, ymin, xmax, ymax = room.plan_bbox()
    exmin, eymin, exmax, eymax = layout.room_extents
    dx = (xmin + xmax) / 2.0 - (exmin + exmax) / 2.0
    dy = (ymin + ymax) / 2.0 - (eymin + eymax) / 2.0
    floor_z = room.z_extent()[0]
    placements = []
    for it in sorted(layout.items, key=lambda i: (i.category, i.index)):
        asset_file, (cl, cw, ch) = assets.asset(it.category)
        placements.append(Placement(
            selector=it.selector, asset=asset_file,
            scale=(it.length / cl, it.width / cw, it.height / ch),
            rotation_deg=it.orientation,
            translation=(it.left + dx, it.top + dy, floor_z)))
    return Scene(room=room, placements=tuple(placements))


# ---------------------------------------------------------------------------
# example bank and backend-driven generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FurnitureExample:
    room_type: str
    extents: tuple[float, float]    # plan width, depth
    css: str


def load_default_bank() -> tuple[FurnitureExample, ...]:
    bank = []
    root = resources.files("roomsynth") / "data" / "furniture_bank"
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".css"):
            continue
        css = entry.read_text()
        layout = parse_furniture_css(css)
        xmin, ymin, xmax, ymax = layout.room_extents
        bank.append(FurnitureExample(room_type=entry.name.split("_", 1)[0],
                                     extents=(xmax - xmin, ymax - ymin),
                                     css=css))
    return tuple(bank)


def load_default_manifest() -> AssetManifest:
    text = (resources.files("roomsynth") / "data" / "assets"
            / "manifest.txt").read_text()
    return parse_manifest(text)


def asset_path(name: str):
    return resources.files("roomsynth") / "data" / "assets" / name


def select_examples(bank, room_type: str, extents: tuple[float, float],
                    k: int = 3) -> list[FurnitureExample]:
    """Nearest-extent selection, same room type first; deterministic."""
    def cost(ex: FurnitureExample):
        d = abs(ex.extents[0] - extents[0]) + abs(ex.extents[1] - extents[1])
        return (0 if ex.room_type == room_type else 1, d, ex.room_type, ex.css)
    return sorted(bank, key=cost)[:k]


def gen_furniture(shape, room_type: str, backend, bank=None,
                  store=None) -> FurnitureLayout:
    """Prompt the backend with nearest-extent in-context examples and parse
    its CSS reply; items leaving the room are dropped with warnings."""
    from .llm import TASK_FURNITURE, assemble_prompt, load_default_store
    bank = bank if bank is not None else load_default_bank()
    store = store if store is not None else load_default_store()
    xmin, ymin, xmax, ymax = shape.plan_bbox()
    examples = select_examples(bank, room_type,
                               (xmax - xmin, ymax - ymin))
    pairs = [(f"extents: {_num(ex.extents[0])} {_num(ex.extents[1])}", ex.css)
             for ex in examples]
    user = (f"room-type: {room_type}\nroom-extents: "
            f"{_num(xmin)} {_num(ymin)} {_num(xmax)} {_num(ymax)}")
    bundle = assemble_prompt(store.task_texts[TASK_FURNITURE], pairs, user)
    layout = parse_furniture_css(backend.complete(bundle))
    layout = FurnitureLayout(items=layout.items,
                             room_extents=(xmin, ymin, xmax, ymax))
    return drop_uncontained(shape, layout)


_REMOVE_RE = re.compile(r"\b(?:remove|delete)\s+(?:the\s+|an?\s+)?"
                        r"([A-Za-z]+?)s?(?:-(\d+))?\b", re.I)


def edit_furniture(layout: FurnitureLayout, command: str, backend,
                   shape=None, store=None) -> FurnitureLayout:
    """Add / Replace / Remove on an existing layout.

    Remove is pure deletion.  Add and Replace ask the backend for a single
    stanza; a Replace reply without a position inherits the removed item's.
    """
    m = _REMOVE_RE.search(command)
    if m and not re.search(r"\breplace\b", command, re.I):
        category = m.group(1).lower()
        index = int(m.group(2)) if m.group(2) else None
        hits = layout.find(category, index)
        if not hits:
            raise ValueError(f"no {category!r} item to remove")
        gone = {it.selector for it in hits}
        return FurnitureLayout(
            items=tuple(it for it in layout.items if it.selector not in gone),
            room_extents=layout.room_extents)

    rm = re.search(r"\breplace\s+(?:the\s+|an?\s+)?([A-Za-z]+?)s?(?:-(\d+))?\b",
                   command, re.I)
    removed = None
    base_items = layout.items
    if rm:
        hits = layout.find(rm.group(1).lower(),
                           int(rm.group(2)) if rm.group(2) else None)
        if not hits:
            raise ValueError(f"no {rm.group(1).lower()!r} item to replace")
        removed = hits[0]
        base_items = tuple(it for it in layout.items if it is not removed)

    from .llm import TASK_FURNITURE_EDIT, assemble_prompt, load_default_store
    store = store if store is not None else load_default_store()
    user = (f"instruction: {command}\ncurrent layout:\n"
            f"{serialize_furniture_css(layout)}")
    last_error = None
    for attempt in range(2):
        stanza = backend.complete(assemble_prompt(
            store.task_texts[TASK_FURNITURE_EDIT], [], user))
        item = _parse_single_stanza(stanza, fallback=removed)
        candidate = FurnitureLayout(items=base_items + (item,),
                                    room_extents=layout.room_extents)
        if shape is None:
            return candidate
        bad = [v for v in containment_report(shape, candidate)
               if v.kind == "out-of-room" and v.selector == item.selector]
        if not bad:
            return candidate
        last_error = bad[0]
        user += (f"\nThe previous proposal was invalid: {bad[0].detail}\n"
                 "Propose a position inside the room.")
    raise ValueError(f"backend proposal failed containment after one retry: "
                     f"{last_error.detail}")


def _parse_single_stanza(stanza: str, fallback=None) -> FurnitureItem:
    try:
        parsed = parse_furniture_css(stanza)
    except CssError as exc:
        if fallback is not None and "missing required" in str(exc) \
                and ("'left'" in str(exc) or "'top'" in str(exc)):
            patched = stanza.replace("}", f"  left: {_num(fallback.left)}m;\n"
                                          f"  top: {_num(fallback.top)}m;\n}}", 1)
            parsed = parse_furniture_css(patched)
        else:
            raise
    if len(parsed.items) != 1:
        raise CssError("expected exactly one stanza in the edit reply")
    return parsed.items[0]
