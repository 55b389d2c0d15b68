"""Prompt assembly, chat-backend contract, in-context example store, and
the deterministic mock backend.

The mock backend is the normative offline behavior: it is a pure function
of the prompt bundle and seed, keyed on ``TASK:`` markers in the system
text, and its rule table (documented per handler below) makes the whole
pipeline runnable without a network.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .dsl import parse_program, typecheck
from .shapes import (RoomShape, parse_shape, serialize_shape, validate_shape)

TASK_PROGRAM = "TASK: program-generation"
TASK_SHAPE = "TASK: shape-generation"
TASK_SHAPE_EDIT = "TASK: shape-edit"
TASK_FURNITURE = "TASK: furniture-generation"
TASK_FURNITURE_EDIT = "TASK: furniture-edit"


@dataclass(frozen=True)
class PromptBundle:
    system: str
    assistant: tuple[str, ...]
    user: str

    def render(self) -> str:
        parts = [f"[system]\n{self.system}"]
        parts += [f"[assistant example {i}]\n{a}"
                  for i, a in enumerate(self.assistant)]
        parts.append(f"[user]\n{self.user}")
        return "\n\n".join(parts)


def assemble_prompt(task_desc: str, examples, instruction: str) -> PromptBundle:
    """Bundle a task description, (prompt, response) example pairs, and the
    user instruction; deterministic in its inputs."""
    if not instruction.strip():
        raise ValueError("instruction must be non-empty")
    rendered = tuple(f"instruction: {a}\nresponse:\n{b.rstrip()}"
                     for a, b in examples)
    return PromptBundle(system=task_desc, assistant=rendered, user=instruction)


class ChatBackend:
    """Contract: complete(bundle, temperature, seed) -> completion text."""

    def complete(self, bundle: PromptBundle, temperature: float = 0.0,
                 seed: int = 0) -> str:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# example store / prompt pack
# ---------------------------------------------------------------------------

def _data_text(name: str) -> str:
    return (resources.files("roomsynth") / "data" / name).read_text()


@dataclass(frozen=True)
class ExampleStore:
    program_examples: tuple[tuple[str, str], ...]
    shape_examples: tuple[tuple[str, str], ...]
    task_texts: dict


def _parse_pairs(text: str) -> tuple[tuple[str, str], ...]:
    pairs = []
    for block in text.split("### instruction")[1:]:
        head, _, body = block.partition("### response")
        pairs.append((head.strip(), body.strip() + "\n"))
    return tuple(pairs)


def _build_store(read) -> ExampleStore:
    tasks = {
        TASK_PROGRAM: read("program_task.txt"),
        TASK_SHAPE: read("shape_task.txt"),
        TASK_SHAPE_EDIT: read("shape_edit_task.txt"),
        TASK_FURNITURE: read("furniture_task.txt"),
        TASK_FURNITURE_EDIT: read("furniture_edit_task.txt"),
    }
    return ExampleStore(
        program_examples=_parse_pairs(read("program_examples.txt")),
        shape_examples=_parse_pairs(read("shape_examples.txt")),
        task_texts=tasks)


def load_default_store() -> ExampleStore:
    return _build_store(lambda name: _data_text(f"prompts/{name}"))


def load_store(root) -> ExampleStore:
    """Prompt pack from a directory laid out like the bundled one."""
    from pathlib import Path
    return _build_store(lambda name: (Path(root) / name).read_text())


# ---------------------------------------------------------------------------
# mock backend
# ---------------------------------------------------------------------------

_DIMS_RE = re.compile(r"(\d+(?:\.\d+)?)\s*m?\s*(?:by|x|×)\s*"
                      r"(\d+(?:\.\d+)?)\s*m\b", re.I)
_NOTCH_RE = re.compile(r"(\d+(?:\.\d+)?)\s*m\s+notch", re.I)
_CEILING_RE = re.compile(r"ceiling(?:\s+height)?\s*(?:of|:|at|to)?\s*"
                         r"(\d+(?:\.\d+)?)\s*m", re.I)

_ROOM_TYPES = ("bedroom", "livingroom", "living room", "diningroom",
               "dining room", "office", "kitchen")

_SURFACE_EDIT_RE = re.compile(
    r"\b(floor|walls?|ceiling|door|window)s?\b", re.I)
_FURNITURE_EDIT_RE = re.compile(r"\b(add|replace|remove|delete)\b", re.I)
_SHAPE_EDIT_RE = re.compile(
    r"\b(increase|decrease|widen|shrink|scale|resize|raise|lower)\b", re.I)


def room_type_of(instruction: str) -> str:
    low = instruction.lower()
    for t in _ROOM_TYPES:
        if t in low:
            return t.replace(" ", "")
    return "bedroom"


class MockChatBackend(ChatBackend):
    """Deterministic rule-table backend; see the per-task helpers."""

    def complete(self, bundle: PromptBundle, temperature: float = 0.0,
                 seed: int = 0) -> str:
        sys_text = bundle.system
        if TASK_PROGRAM in sys_text:
            return self._program(bundle.user)
        if TASK_SHAPE_EDIT in sys_text:
            return self._shape_edit(bundle.user)
        if TASK_SHAPE in sys_text:
            return self._shape(bundle.user)
        if TASK_FURNITURE_EDIT in sys_text:
            return self._furniture_edit(bundle.user)
        if TASK_FURNITURE in sys_text:
            return self._furniture(bundle)
        raise ValueError("mock backend: no TASK marker in system text")

    # -- program generation -------------------------------------------------

    def _program(self, user: str) -> str:
        instruction, context = _split_user(user)
        esc = instruction.replace("\\", "\\\\").replace("'", "\\'")
        n = _next_index(context)
        prev = _latest_vars(context)
        if context and _FURNITURE_EDIT_RE.search(instruction) \
                and "furniture" in context.values():
            return (f"FURN{n}=EditFurniture(furniture={prev['furniture']}, "
                    f"instruction='{esc}')\n")
        if context and _SHAPE_EDIT_RE.search(instruction) \
                and "shape" in context.values():
            return (
                f"SHAPE{n}=EditShape(shape={prev['shape']}, instruction='{esc}')\n"
                f"LAYOUT{n}=EditLayout(shape=SHAPE{n})\n"
                f"DEPTH{n}=EditDepth(shape=SHAPE{n})\n"
                f"SEM{n}=EditSemantic(layout=LAYOUT{n}, shape=SHAPE{n})\n"
                f"TEX{n}=EditTexture(texture={prev['texture']}, instruction='', "
                f"semantic=SEM{n}, depth=DEPTH{n})\n"
                f"ROOM{n}=EditEmptyRoom(shape=SHAPE{n}, texture=TEX{n})\n")
        if context and _SURFACE_EDIT_RE.search(instruction) \
                and "texture" in context.values():
            return (
                f"TEX{n}=EditTexture(texture={prev['texture']}, "
                f"instruction='{esc}')\n"
                f"ROOM{n}=EditEmptyRoom(shape={prev['shape']}, "
                f"texture=TEX{n})\n")
        lines = [
            f"SHAPE{n}=GenShape(instruction='{esc}')",
            f"LAYOUT{n}=GenLayout(shape=SHAPE{n})",
            f"DEPTH{n}=GenDepth(shape=SHAPE{n})",
            f"SEM{n}=GenSemantic(layout=LAYOUT{n}, shape=SHAPE{n})",
            f"TEX{n}=GenTexture(semantic=SEM{n}, depth=DEPTH{n}, "
            f"instruction='{esc}')",
            f"ROOM{n}=GenEmptyRoom(shape=SHAPE{n}, texture=TEX{n})",
        ]
        if re.search(r"\bfurnish|furniture\b", instruction, re.I):
            lines += [
                f"FURN{n}=GenFurniture(shape=SHAPE{n}, "
                f"room_type='{room_type_of(instruction)}')",
                f"SCENE{n}=Merge(room=ROOM{n}, furniture=FURN{n})",
            ]
        return "\n".join(lines) + "\n"

    # -- shape generation ---------------------------------------------------

    def _shape(self, user: str) -> str:
        instruction, _ = _split_user(user)
        m = _DIMS_RE.search(instruction)
        w, d = (float(m.group(1)), float(m.group(2))) if m else (4.0, 4.0)
        ceiling = 2.8
        cm = _CEILING_RE.search(instruction)
        if cm:
            ceiling = float(cm.group(1))
        nm = _NOTCH_RE.search(instruction)
        if "l-shaped" in instruction.lower() or "l shaped" in instruction.lower():
            n = float(nm.group(1)) if nm else min(w, d) / 3.0
            corners = ((0, 0), (w, 0), (w, d - n), (w - n, d - n),
                       (w - n, d), (0, d))
        else:
            corners = ((0, 0), (w, 0), (w, d), (0, d))
        return serialize_shape(RoomShape(floor_corners=corners,
                                         ceiling_height=ceiling))

    # -- shape editing ------------------------------------------------------

    def _shape_edit(self, user: str) -> str:
        instruction, _ = _split_user(user)
        _, _, shape_text = user.partition("current shape:\n")
        shape = parse_shape(shape_text)
        xs = [c[0] for c in shape.floor_corners]
        ys = [c[1] for c in shape.floor_corners]
        width = max(xs) - min(xs)
        length = max(ys) - min(ys)
        ceiling = shape.ceiling_height
        low = instruction.lower()

        m = re.search(r"scale (?:it |the room )?to (\d+(?:\.\d+)?)\s*m?\s*by\s*"
                      r"(\d+(?:\.\d+)?)\s*m", low)
        tw, tl = (width, length)
        if m:
            tw, tl = float(m.group(1)), float(m.group(2))
        m = re.search(r"(increase|decrease) the (width|length) by "
                      r"(\d+(?:\.\d+)?)\s*m", low)
        if m:
            delta = float(m.group(3)) * (1 if m.group(1) == "increase" else -1)
            if m.group(2) == "width":
                tw = width + delta
            else:
                tl = length + delta
        m = re.search(r"(?:raise|set|lower) the ceiling to (\d+(?:\.\d+)?)\s*m", low)
        if m:
            ceiling = float(m.group(1))
        m = re.search(r"(raise|increase|lower|decrease) the "
                      r"(?:ceiling|height) by (\d+(?:\.\d+)?)\s*m", low)
        if m:
            sign = 1 if m.group(1) in ("raise", "increase") else -1
            ceiling = ceiling + sign * float(m.group(2))

        fx = tw / width if width else 1.0
        fy = tl / length if length else 1.0
        corners = tuple((min(xs) + (x - min(xs)) * fx,
                         min(ys) + (y - min(ys)) * fy)
                        for x, y in shape.floor_corners)
        return serialize_shape(RoomShape(floor_corners=corners,
                                         ceiling_height=ceiling,
                                         floor_z=shape.floor_z,
                                         openings=shape.openings))

    # -- furniture ----------------------------------------------------------

    def _furniture(self, bundle: PromptBundle) -> str:
        from . import furniture as fu
        m = re.search(r"room-extents:\s*([-\d.eE ]+)", bundle.user)
        if not m:
            raise ValueError("mock furniture task needs room-extents")
        xmin, ymin, xmax, ymax = (float(v) for v in m.group(1).split())
        best = None
        for entry in bundle.assistant:
            em = re.search(r"extents:\s*([\d.eE]+)\s+([\d.eE]+)", entry)
            if not em:
                continue
            ew, ed = float(em.group(1)), float(em.group(2))
            css = entry.partition("response:\n")[2]
            cost = abs(ew - (xmax - xmin)) + abs(ed - (ymax - ymin))
            if best is None or cost < best[0]:
                best = (cost, ew, ed, css)
        if best is None:
            raise ValueError("mock furniture task needs in-context examples")
        _, ew, ed, css = best
        layout = fu.parse_furniture_css(css)
        exmin, eymin, exmax, eymax = layout.room_extents
        fx = (xmax - xmin) / (exmax - exmin)
        fy = (ymax - ymin) / (eymax - eymin)
        items = tuple(
            fu.FurnitureItem(
                category=it.category, index=it.index, length=it.length,
                width=it.width, height=it.height,
                left=xmin + (it.left - exmin) * fx,
                top=ymin + (it.top - eymin) * fy,
                orientation=it.orientation)
            for it in layout.items)
        return fu.serialize_furniture_css(
            fu.FurnitureLayout(items=items,
                               room_extents=(xmin, ymin, xmax, ymax)))

    def _furniture_edit(self, user: str) -> str:
        from . import furniture as fu
        command, _ = _split_user(user)
        _, _, css = user.partition("current layout:\n")
        layout = fu.parse_furniture_css(css)
        xmin, ymin, xmax, ymax = layout.room_extents
        cx, cy = (xmin + xmax) / 2.0, (ymin + ymax) / 2.0
        low = command.lower()
        m = re.search(r"replace (?:the )?([a-z]+)(?:-(\d+))? with "
                      r"(?:an? )?([a-z]+)", low)
        if m:
            old_cat, old_idx, new_cat = m.group(1), m.group(2), m.group(3)
            hits = layout.find(old_cat, int(old_idx) if old_idx else None)
            left, top, orient = (hits[0].left, hits[0].top,
                                 hits[0].orientation) if hits else (cx, cy, 0.0)
            return _stanza(fu, new_cat, layout, left, top, orient)
        m = re.search(r"add (?:an? )?([a-z]+)", low)
        if m:
            return _stanza(fu, m.group(1), layout, cx, cy, 0.0)
        raise ValueError(f"mock furniture edit: unsupported command {command!r}")


_DEFAULT_DIMS = {
    "bed": (2.1, 1.6, 1.0), "nightstand": (0.5, 0.4, 0.6),
    "wardrobe": (1.2, 0.6, 2.0), "desk": (1.2, 0.6, 0.75),
    "chair": (0.5, 0.5, 0.9), "table": (1.6, 0.9, 0.75),
    "sofa": (2.0, 0.9, 0.8), "bookshelf": (0.9, 0.3, 1.8),
    "lamp": (0.4, 0.4, 1.5), "dresser": (1.0, 0.5, 0.8),
    "rug": (2.0, 1.4, 0.02), "plant": (0.4, 0.4, 1.2),
}


def _stanza(fu, category: str, layout, left: float, top: float,
            orientation: float) -> str:
    dims = _DEFAULT_DIMS.get(category, (1.0, 1.0, 1.0))
    index = max((it.index for it in layout.items if it.category == category),
                default=-1) + 1
    item = fu.FurnitureItem(category=category, index=index, length=dims[0],
                            width=dims[1], height=dims[2], left=left, top=top,
                            orientation=orientation)
    single = fu.FurnitureLayout(items=(item,),
                                room_extents=layout.room_extents)
    css = fu.serialize_furniture_css(single)
    # strip the room-extents header; the edit response is one stanza
    return "\n".join(line for line in css.splitlines()
                     if not line.startswith("/*")) + "\n"


def _split_user(user: str) -> tuple[str, dict[str, str]]:
    """(instruction, context variable types) from the user content."""
    instruction = user
    context: dict[str, str] = {}
    m = re.search(r"^instruction:\s*(.*)$", user, re.M)
    if m:
        instruction = m.group(1)
    for cm in re.finditer(r"^context:\s*(\w+)\s*:\s*(\w+)\s*$", user, re.M):
        context[cm.group(1)] = cm.group(2)
    return instruction, context


_VAR_RE = re.compile(r"^([A-Za-z_]+?)(\d+)$")


def _next_index(context: dict[str, str]) -> int:
    n = -1
    for name in context:
        m = _VAR_RE.match(name)
        if m:
            n = max(n, int(m.group(2)))
    return n + 1


def _latest_vars(context: dict[str, str]) -> dict[str, str]:
    """type -> highest-indexed variable name of that type."""
    latest: dict[str, tuple[int, str]] = {}
    for name, type_ in context.items():
        m = _VAR_RE.match(name)
        idx = int(m.group(2)) if m else -1
        if type_ not in latest or idx > latest[type_][0]:
            latest[type_] = (idx, name)
    return {t: name for t, (_, name) in latest.items()}


# ---------------------------------------------------------------------------
# generation entry points
# ---------------------------------------------------------------------------

class GenerationError(RuntimeError):
    def __init__(self, message: str, transcripts=()):
        super().__init__(message)
        self.transcripts = list(transcripts)


def _strip_fences(text: str) -> str:
    text = text.strip()
    m = re.match(r"^```[A-Za-z]*\n(.*?)\n?```$", text, re.S)
    if m:
        text = m.group(1)
    lines = [line.rstrip() for line in text.splitlines()]
    return "\n".join(line for line in lines if line) + "\n"


def generate_program(instruction: str, backend: ChatBackend,
                     store: ExampleStore, registry=None,
                     context: dict[str, str] | None = None) -> str:
    """Instruction -> validated program text, with one repair round."""
    user = f"instruction: {instruction}"
    if context:
        user += "".join(f"\ncontext: {name}: {type_}"
                        for name, type_ in sorted(context.items()))
    bundle = assemble_prompt(store.task_texts[TASK_PROGRAM],
                             store.program_examples, user)
    transcripts = []
    for attempt in range(2):
        completion = backend.complete(bundle)
        transcripts.append((bundle.render(), completion))
        text = _strip_fences(completion)
        try:
            program = parse_program(text, predefined=set(context or ()))
            diags = typecheck(program, registry, context) if registry else []
        except ValueError as exc:
            diags = getattr(exc, "diagnostics", [str(exc)])
        if not diags:
            return text
        if attempt == 0:
            feedback = "\n".join(str(d) for d in diags)
            bundle = PromptBundle(system=bundle.system,
                                  assistant=bundle.assistant,
                                  user=bundle.user +
                                  f"\nThe previous response was invalid:\n"
                                  f"{completion}\nDiagnostics:\n{feedback}\n"
                                  "Respond with a corrected program only.")
    raise GenerationError("backend did not produce a valid program after one "
                          "repair round", transcripts)


def gen_shape(instruction: str, backend: ChatBackend,
              store: ExampleStore) -> RoomShape:
    bundle = assemble_prompt(store.task_texts[TASK_SHAPE],
                             store.shape_examples,
                             f"instruction: {instruction}")
    completion = _strip_fences(backend.complete(bundle))
    return validate_shape(parse_shape(completion))


def edit_shape(shape: RoomShape, instruction: str,
               backend: ChatBackend, store: ExampleStore) -> RoomShape:
    user = (f"instruction: {instruction}\ncurrent shape:\n"
            f"{serialize_shape(shape)}")
    bundle = assemble_prompt(store.task_texts[TASK_SHAPE_EDIT],
                             store.shape_examples, user)
    completion = _strip_fences(backend.complete(bundle))
    return validate_shape(parse_shape(completion))
