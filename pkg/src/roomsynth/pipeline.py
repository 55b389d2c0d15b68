"""Registry wiring: the 16 pipeline modules bound to typed handlers.

Binding values for shapes, textures, and furniture are small wrappers that
carry the provenance later edits need (camera pose, texture spec, source
maps, room polygon), so edit modules can work from a single variable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import llm
from .dsl import ModuleRegistry, ModuleSignature, MultiBinding, Param
from .furniture import (FurnitureLayout, Scene, edit_furniture, gen_furniture,
                        load_default_bank, load_default_manifest, merge)
from .meshes import RoomMesh, build_empty_room
from .panorama import (DepthMap, LayoutMap, SemanticMap, gen_depth, gen_layout,
                       gen_semantic)
from .projection import PanoramaGrid
from .shapes import CameraPose, RoomShape, default_camera
from .textures import TextureSpec, gen_texture_procedural, parse_texture_spec

SEMANTIC_TYPES = ("shape", "layout_map", "depth_map", "semantic_map",
                  "texture", "mesh", "furniture", "scene", "text", "number",
                  "number_list")


@dataclass(frozen=True)
class ShapeValue:
    shape: RoomShape
    cam: CameraPose


@dataclass(frozen=True)
class TextureValue:
    image: object               # TextureImage
    spec: TextureSpec
    semantic: SemanticMap
    depth: DepthMap
    seed: int = 0


@dataclass(frozen=True)
class FurnitureValue:
    layout: FurnitureLayout
    shape: RoomShape


@dataclass
class PipelineConfig:
    grid: PanoramaGrid = field(default_factory=lambda: PanoramaGrid(512, 256))
    seed: int = 0
    subdivision_deg: float = 5.0
    backend: llm.ChatBackend = field(default_factory=llm.MockChatBackend)
    store: llm.ExampleStore | None = None
    bank: tuple | None = None
    manifest: object = None
    texture_backend: object = None      # None -> procedural
    load_room: object = None            # callable(session_id) -> MultiBinding

    def __post_init__(self):
        if self.store is None:
            self.store = llm.load_default_store()
        if self.bank is None:
            self.bank = load_default_bank()
        if self.manifest is None:
            self.manifest = load_default_manifest()


def _sig(params, result) -> ModuleSignature:
    return ModuleSignature(params=tuple(
        Param(name=n, type=t, required=r) for n, t, r in params), result=result)


def build_registry(config: PipelineConfig) -> ModuleRegistry:
    reg = ModuleRegistry()

    def gen_shape_handler(instruction):
        shape = llm.gen_shape(instruction, config.backend, config.store)
        return ShapeValue(shape=shape, cam=default_camera(shape))

    def edit_shape_handler(shape, instruction):
        edited = llm.edit_shape(shape.shape, instruction, config.backend,
                                config.store)
        return ShapeValue(shape=edited, cam=default_camera(edited))

    def layout_handler(shape):
        return gen_layout(shape.shape, shape.cam, config.grid)

    def depth_handler(shape):
        return gen_depth(shape.shape, shape.cam, config.grid)

    def semantic_handler(layout, shape):
        return gen_semantic(layout, config.grid, shape.shape, shape.cam)

    def gen_texture_handler(semantic, depth, instruction, seed=None,
                            layout=None):
        seed = config.seed if seed is None else int(seed)
        spec = parse_texture_spec(instruction)
        if config.texture_backend is not None:
            if layout is None:
                raise ValueError("the remote texture backend needs the "
                                 "layout map; pass layout=...")
            image = config.texture_backend.generate(
                layout, depth, semantic, instruction, seed)
        else:
            image = gen_texture_procedural(semantic, depth, spec, seed=seed)
        return TextureValue(image=image, spec=spec, semantic=semantic,
                            depth=depth, seed=seed)

    def edit_texture_handler(texture, instruction, semantic=None, depth=None):
        semantic = semantic if semantic is not None else texture.semantic
        depth = depth if depth is not None else texture.depth
        spec = parse_texture_spec(instruction, base=texture.spec) \
            if instruction.strip() else replace(texture.spec)
        image = gen_texture_procedural(semantic, depth, spec,
                                       seed=texture.seed)
        return TextureValue(image=image, spec=spec, semantic=semantic,
                            depth=depth, seed=texture.seed)

    def room_handler(shape, texture):
        return build_empty_room(shape.shape, shape.cam, texture.image,
                                subdivision_deg=config.subdivision_deg)

    def gen_furniture_handler(shape, room_type):
        layout = gen_furniture(shape.shape, room_type, config.backend,
                               bank=config.bank, store=config.store)
        return FurnitureValue(layout=layout, shape=shape.shape)

    def edit_furniture_handler(furniture, instruction):
        layout = edit_furniture(furniture.layout, instruction, config.backend,
                                shape=furniture.shape, store=config.store)
        return FurnitureValue(layout=layout, shape=furniture.shape)

    def merge_handler(room, furniture):
        return merge(room, furniture.layout, config.manifest)

    def load_room_handler(session):
        if config.load_room is None:
            raise RuntimeError("LoadRoom needs a session store; configure "
                               "PipelineConfig.load_room")
        return config.load_room(session)

    shape_arg = ("shape", "shape", True)
    instr_arg = ("instruction", "text", True)
    reg.register("GenShape", _sig([instr_arg], "shape"), gen_shape_handler)
    reg.register("EditShape", _sig([shape_arg, instr_arg], "shape"),
                 edit_shape_handler)
    for name in ("GenLayout", "EditLayout"):
        reg.register(name, _sig([shape_arg], "layout_map"), layout_handler)
    for name in ("GenDepth", "EditDepth"):
        reg.register(name, _sig([shape_arg], "depth_map"), depth_handler)
    for name in ("GenSemantic", "EditSemantic"):
        reg.register(name, _sig([("layout", "layout_map", True), shape_arg],
                                "semantic_map"), semantic_handler)
    reg.register("GenTexture",
                 _sig([("semantic", "semantic_map", True),
                       ("depth", "depth_map", True), instr_arg,
                       ("seed", "number", False),
                       ("layout", "layout_map", False)], "texture"),
                 gen_texture_handler)
    reg.register("EditTexture",
                 _sig([("texture", "texture", True), instr_arg,
                       ("semantic", "semantic_map", False),
                       ("depth", "depth_map", False)], "texture"),
                 edit_texture_handler)
    for name in ("GenEmptyRoom", "EditEmptyRoom"):
        reg.register(name, _sig([shape_arg, ("texture", "texture", True)],
                                "mesh"), room_handler)
    reg.register("GenFurniture",
                 _sig([shape_arg, ("room_type", "text", True)], "furniture"),
                 gen_furniture_handler)
    reg.register("EditFurniture",
                 _sig([("furniture", "furniture", True), instr_arg],
                      "furniture"), edit_furniture_handler)
    reg.register("Merge", _sig([("room", "mesh", True),
                                ("furniture", "furniture", True)], "scene"),
                 merge_handler)
    reg.register("LoadRoom", _sig([("session", "text", True)], "text"),
                 load_room_handler)
    return reg
