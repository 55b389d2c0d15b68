"""File-backed sessions: content-addressed artifacts, atomic step commits,
and environment reconstruction for the iterative edit loop.

Layout on disk:

    root/
      artifacts/<sha256>.<ext>     content-addressed, immutable
      sessions/<id>/
        index.json                 committed pointer + bindings snapshot
        steps/<n>.json             one record per step, immutable
        lock                       advisory writer lock

A step is committed by writing its record and then atomically replacing
``index.json`` (write-to-temp + rename), so a crash mid-step leaves the
previous index in place and the session loadable.
"""

from __future__ import annotations

import base64
import fcntl
import hashlib
import json
import os
import re
import tempfile
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from . import raster_io
from .dsl import Environment, MultiBinding, ProgramError, execute, parse_program
from .furniture import (FurnitureLayout, Placement, Scene,
                        parse_furniture_css, serialize_furniture_css)
from .llm import GenerationError, generate_program
from .meshes import RoomMesh
from .obj_io import MTL_NAME, OBJ_NAME, TEXTURE_NAME, export_mesh, import_mesh
from .pipeline import (FurnitureValue, PipelineConfig, ShapeValue,
                       TextureValue, build_registry)
from .shapes import CameraPose, parse_shape, serialize_shape
from .textures import SurfaceSpec, TextureSpec


class SessionError(RuntimeError):
    pass


class IntegrityError(SessionError):
    """An artifact's bytes no longer match its recorded digest."""


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _dumps(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


# ---------------------------------------------------------------------------
# artifact store
# ---------------------------------------------------------------------------

_DIGEST_RE = re.compile(r"^[0-9a-f]{64}$")


class ArtifactStore:
    """Write-once files named by the sha256 of their content."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes, ext: str) -> str:
        digest = _sha256(data)
        path = self.root / f"{digest}{ext}"
        if not path.exists():
            _atomic_write(path, data)
        return digest

    def find(self, digest: str) -> Path:
        if not _DIGEST_RE.match(digest):
            raise SessionError(f"malformed artifact digest {digest!r}")
        hits = sorted(self.root.glob(f"{digest}.*"))
        if not hits:
            raise SessionError(f"artifact {digest} not found")
        return hits[0]

    def get(self, digest: str) -> bytes:
        data = self.find(digest).read_bytes()
        if _sha256(data) != digest:
            raise IntegrityError(f"artifact {digest} fails digest verification")
        return data


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# per-type codecs
# ---------------------------------------------------------------------------

def _spec_to_json(spec: TextureSpec) -> dict:
    return {
        "surfaces": {name: {"color": list(s.color), "pattern": s.pattern,
                            "scale": s.scale,
                            "secondary": list(s.secondary)
                            if s.secondary is not None else None}
                     for name, s in spec.surfaces.items()},
        "free_text": spec.free_text,
        "notes": list(spec.notes),
    }


def _spec_from_json(obj: dict) -> TextureSpec:
    surfaces = {
        name: SurfaceSpec(color=tuple(s["color"]), pattern=s["pattern"],
                          scale=s["scale"],
                          secondary=tuple(s["secondary"])
                          if s["secondary"] is not None else None)
        for name, s in obj["surfaces"].items()}
    return TextureSpec(surfaces=surfaces, free_text=obj["free_text"],
                       notes=tuple(obj["notes"]))


def _encode(value, type_: str, store: ArtifactStore) -> tuple[bytes, str]:
    if type_ == "shape":
        return _dumps({"shape": serialize_shape(value.shape),
                       "camera": {"position": list(value.cam.position),
                                  "height": value.cam.height,
                                  "yaw": value.cam.yaw}}), ".json"
    if type_ == "layout_map":
        return raster_io.layout_to_png_bytes(value), ".png"
    if type_ == "depth_map":
        return raster_io.depth_to_npy_bytes(value), ".npy"
    if type_ == "semantic_map":
        return raster_io.semantic_to_png_bytes(value), ".png"
    if type_ == "texture":
        sem = store.put(*_encode(value.semantic, "semantic_map", store))
        dep = store.put(*_encode(value.depth, "depth_map", store))
        png = raster_io.texture_to_png_bytes(value.image)
        return _dumps({"png": base64.b64encode(png).decode(),
                       "spec": _spec_to_json(value.spec),
                       "semantic": sem, "depth": dep,
                       "seed": value.seed}), ".json"
    if type_ == "mesh":
        with tempfile.TemporaryDirectory() as tmp:
            export_mesh(value, tmp)
            refs = {
                "obj": store.put((Path(tmp) / OBJ_NAME).read_bytes(), ".obj"),
                "mtl": store.put((Path(tmp) / MTL_NAME).read_bytes(), ".mtl"),
                "texture": store.put(
                    (Path(tmp) / TEXTURE_NAME).read_bytes(), ".png"),
            }
        return _dumps(refs), ".json"
    if type_ == "furniture":
        return _dumps({"css": serialize_furniture_css(value.layout),
                       "shape": serialize_shape(value.shape)}), ".json"
    if type_ == "scene":
        room = store.put(*_encode(value.room, "mesh", store))
        return _dumps({"room": room, "placements": [
            {"selector": p.selector, "asset": p.asset,
             "scale": list(p.scale), "rotation_deg": p.rotation_deg,
             "translation": list(p.translation)}
            for p in value.placements]}), ".json"
    if type_ in ("text", "number", "number_list"):
        return _dumps({"value": value}), ".json"
    raise SessionError(f"no artifact codec for type {type_!r}")


def _decode(digest: str, type_: str, store: ArtifactStore):
    data = store.get(digest)
    if type_ == "layout_map":
        return raster_io.layout_from_png_bytes(data)
    if type_ == "depth_map":
        return raster_io.depth_from_npy_bytes(data)
    if type_ == "semantic_map":
        return raster_io.semantic_from_png_bytes(data)
    obj = json.loads(data)
    if type_ == "shape":
        cam = obj["camera"]
        return ShapeValue(shape=parse_shape(obj["shape"]),
                          cam=CameraPose(position=tuple(cam["position"]),
                                         height=cam["height"],
                                         yaw=cam["yaw"]))
    if type_ == "texture":
        image = raster_io.texture_from_png_bytes(
            base64.b64decode(obj["png"]))
        return TextureValue(image=image, spec=_spec_from_json(obj["spec"]),
                            semantic=_decode(obj["semantic"], "semantic_map",
                                             store),
                            depth=_decode(obj["depth"], "depth_map", store),
                            seed=obj["seed"])
    if type_ == "mesh":
        with tempfile.TemporaryDirectory() as tmp:
            for name, key in ((OBJ_NAME, "obj"), (MTL_NAME, "mtl"),
                              (TEXTURE_NAME, "texture")):
                (Path(tmp) / name).write_bytes(store.get(obj[key]))
            return import_mesh(Path(tmp) / OBJ_NAME)
    if type_ == "furniture":
        return FurnitureValue(layout=parse_furniture_css(obj["css"]),
                              shape=parse_shape(obj["shape"]))
    if type_ == "scene":
        return Scene(room=_decode(obj["room"], "mesh", store),
                     placements=tuple(
                         Placement(selector=p["selector"], asset=p["asset"],
                                   scale=tuple(p["scale"]),
                                   rotation_deg=p["rotation_deg"],
                                   translation=tuple(p["translation"]))
                         for p in obj["placements"]))
    if type_ in ("text", "number", "number_list"):
        return obj["value"]
    raise SessionError(f"no artifact codec for type {type_!r}")


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArtifactRecord:
    name: str
    type: str
    digest: str
    file: str

    def to_json(self):
        return {"name": self.name, "type": self.type, "digest": self.digest,
                "file": self.file}

    @classmethod
    def from_json(cls, obj):
        return cls(name=obj["name"], type=obj["type"], digest=obj["digest"],
                   file=obj["file"])


@dataclass(frozen=True)
class StepRecord:
    index: int
    instruction: str
    program: str
    status: str                       # "ok" | "failed"
    bindings: tuple[ArtifactRecord, ...]
    error: str | None = None
    created: float = 0.0

    def to_json(self):
        return {"index": self.index, "instruction": self.instruction,
                "program": self.program, "status": self.status,
                "bindings": [b.to_json() for b in self.bindings],
                "error": self.error, "created": self.created}

    @classmethod
    def from_json(cls, obj):
        return cls(index=obj["index"], instruction=obj["instruction"],
                   program=obj["program"], status=obj["status"],
                   bindings=tuple(ArtifactRecord.from_json(b)
                                  for b in obj["bindings"]),
                   error=obj.get("error"), created=obj.get("created", 0.0))


@dataclass
class SessionState:
    id: str
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def bindings(self) -> dict[str, ArtifactRecord]:
        """Environment manifest = fold of the successful steps' bindings."""
        out: dict[str, ArtifactRecord] = {}
        for step in self.steps:
            if step.status == "ok":
                for rec in step.bindings:
                    out[rec.name] = rec
        return out


# ---------------------------------------------------------------------------
# session store
# ---------------------------------------------------------------------------

class SessionStore:
    def __init__(self, root):
        self.root = Path(root)
        self.artifacts = ArtifactStore(self.root / "artifacts")
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)

    # -- paths --------------------------------------------------------------

    def _dir(self, session_id: str) -> Path:
        return self.root / "sessions" / session_id

    def _index_path(self, session_id: str) -> Path:
        return self._dir(session_id) / "index.json"

    def _step_path(self, session_id: str, n: int) -> Path:
        return self._dir(session_id) / "steps" / f"{n}.json"

    # -- lifecycle ----------------------------------------------------------

    def create(self, from_session: str | None = None,
               from_step: int | None = None) -> str:
        session_id = uuid.uuid4().hex[:12]
        d = self._dir(session_id)
        (d / "steps").mkdir(parents=True)
        (d / "lock").touch()
        inherited: list[StepRecord] = []
        if from_session is not None:
            src = self.load(from_session)
            upto = len(src.steps) if from_step is None else from_step
            if not 0 <= upto <= len(src.steps):
                raise SessionError(f"session {from_session} has no step {upto}")
            inherited = src.steps[:upto]
            for step in inherited:
                _atomic_write(self._step_path(session_id, step.index),
                              _dumps(step.to_json()))
        self._commit_index(session_id, len(inherited))
        return session_id

    def _commit_index(self, session_id: str, committed: int) -> None:
        _atomic_write(self._index_path(session_id),
                      _dumps({"id": session_id, "committed": committed}))

    def exists(self, session_id: str) -> bool:
        return self._index_path(session_id).exists()

    def list_sessions(self) -> list[str]:
        return sorted(p.parent.name for p in
                      (self.root / "sessions").glob("*/index.json"))

    def load(self, session_id: str) -> SessionState:
        path = self._index_path(session_id)
        if not path.exists():
            raise SessionError(f"unknown session {session_id!r}")
        index = json.loads(path.read_bytes())
        steps = [StepRecord.from_json(json.loads(
                     self._step_path(session_id, n).read_bytes()))
                 for n in range(1, index["committed"] + 1)]
        return SessionState(id=session_id, steps=steps)

    # -- environments -------------------------------------------------------

    def load_environment(self, session_id: str,
                         step: int | None = None) -> Environment:
        """Decode the bindings manifest into typed values, verifying every
        artifact digest."""
        state = self.load(session_id)
        if step is not None:
            if not 0 <= step <= len(state.steps):
                raise SessionError(f"session {session_id} has no step {step}")
            state = SessionState(id=state.id, steps=state.steps[:step])
        env = Environment()
        for name, rec in state.bindings.items():
            env.bind(name, _decode(rec.digest, rec.type, self.artifacts),
                     rec.type)
        return env

    def configure(self, config: PipelineConfig) -> PipelineConfig:
        """Wire LoadRoom to this store."""
        def load_room(session_id: str) -> MultiBinding:
            env = self.load_environment(session_id)
            return MultiBinding(
                primary=session_id, primary_type="text",
                extra={name: (b.value, b.type)
                       for name, b in env.bindings.items()})
        config.load_room = load_room
        return config

    # -- the edit loop ------------------------------------------------------

    def run_instruction(self, session_id: str, instruction: str,
                        config: PipelineConfig) -> StepRecord:
        """generate -> typecheck -> execute -> commit, atomically.

        A failed generation or execution still commits a step record (with
        the diagnostics), but no bindings, so the environment is unchanged.
        """
        if not self.exists(session_id):
            raise SessionError(f"unknown session {session_id!r}")
        self.configure(config)
        registry = build_registry(config)
        lock_path = self._dir(session_id) / "lock"
        with open(lock_path, "r+") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            state = self.load(session_id)
            env = self.load_environment(session_id)
            before = set(env.bindings)
            n = len(state.steps) + 1
            program_text = ""
            try:
                program_text = generate_program(
                    instruction, config.backend, config.store, registry,
                    context=env.types() or None)
                program = parse_program(program_text, predefined=before)
                execute(program, env, registry)
            except (GenerationError, ProgramError, Exception) as exc:
                step = StepRecord(index=n, instruction=instruction,
                                  program=program_text, status="failed",
                                  bindings=(), error=str(exc),
                                  created=time.time())
                self._commit_step(session_id, step)
                return step
            records = []
            for name in sorted(set(env.bindings) - before):
                binding = env.bindings[name]
                data, ext = _encode(binding.value, binding.type,
                                    self.artifacts)
                digest = self.artifacts.put(data, ext)
                records.append(ArtifactRecord(
                    name=name, type=binding.type, digest=digest,
                    file=f"{digest}{ext}"))
            step = StepRecord(index=n, instruction=instruction,
                              program=program_text, status="ok",
                              bindings=tuple(records), created=time.time())
            self._commit_step(session_id, step)
            return step

    def _commit_step(self, session_id: str, step: StepRecord) -> None:
        _atomic_write(self._step_path(session_id, step.index),
                      _dumps(step.to_json()))
        self._commit_index(session_id, step.index)
