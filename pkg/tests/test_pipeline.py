"""Registry wiring and end-to-end program execution on a small grid."""

import pytest

from roomsynth.dsl import (Environment, ExecutionError, ModuleSignature,
                           Param, execute, parse_program, typecheck)
from roomsynth.furniture import FurnitureLayout
from roomsynth.llm import MockChatBackend, generate_program
from roomsynth.meshes import RoomMesh
from roomsynth.panorama import DepthMap, LayoutMap, SemanticMap
from roomsynth.pipeline import (FurnitureValue, PipelineConfig, ShapeValue,
                                TextureValue, build_registry)
from roomsynth.projection import PanoramaGrid

MODULES = ("GenShape", "EditShape", "GenLayout", "EditLayout", "GenDepth",
           "EditDepth", "GenSemantic", "EditSemantic", "GenTexture",
           "EditTexture", "GenEmptyRoom", "EditEmptyRoom", "GenFurniture",
           "EditFurniture", "Merge", "LoadRoom")

CANONICAL = """\
SHAPE0=GenShape(instruction='Create a 4m by 3m bedroom')
LAYOUT0=GenLayout(shape=SHAPE0)
DEPTH0=GenDepth(shape=SHAPE0)
SEM0=GenSemantic(layout=LAYOUT0, shape=SHAPE0)
TEX0=GenTexture(semantic=SEM0, depth=DEPTH0, instruction='a wooden floor')
ROOM0=GenEmptyRoom(shape=SHAPE0, texture=TEX0)
"""


@pytest.fixture(scope="module")
def config():
    return PipelineConfig(grid=PanoramaGrid(128, 64), subdivision_deg=12.0)


@pytest.fixture(scope="module")
def registry(config):
    return build_registry(config)


def test_all_sixteen_modules_registered(registry):
    for name in MODULES:
        assert name in registry
    assert len(registry.entries) == len(MODULES)


def test_canonical_program_typechecks_cleanly(registry):
    assert typecheck(parse_program(CANONICAL), registry) == []


def test_type_mismatch_is_reported(registry):
    bad = CANONICAL.replace("GenSemantic(layout=LAYOUT0",
                            "GenSemantic(layout=DEPTH0")
    diags = typecheck(parse_program(bad), registry)
    assert any(d.code == "type-mismatch" and "layout_map" in d.message
               for d in diags)


def test_unknown_module_is_reported(registry):
    program = parse_program(CANONICAL +
                            "WIN0=GenWindow(shape=SHAPE0)\n")
    diags = typecheck(program, registry)
    assert [d.code for d in diags] == ["unknown-module"]


def test_registry_rejects_silent_redefinition(registry):
    sig = ModuleSignature(params=(Param("instruction", "text"),),
                          result="shape")
    with pytest.raises(ValueError, match="already registered"):
        registry.register("GenShape", sig, lambda **kw: None)


def test_end_to_end_furnished_room(config, registry):
    instruction = ("Create a 4m by 3m bedroom with a wooden floor and light "
                   "gray walls, and furnish it")
    text = generate_program(instruction, MockChatBackend(), config.store,
                            registry)
    env = execute(parse_program(text), Environment(), registry)
    types = env.types()
    assert types == {"SHAPE0": "shape", "LAYOUT0": "layout_map",
                     "DEPTH0": "depth_map", "SEM0": "semantic_map",
                     "TEX0": "texture", "ROOM0": "mesh", "FURN0": "furniture",
                     "SCENE0": "scene"}
    shape = env.bindings["SHAPE0"].value
    assert isinstance(shape, ShapeValue)
    assert shape.shape.plan_bbox() == (0.0, 0.0, 4.0, 3.0)
    assert isinstance(env.bindings["LAYOUT0"].value, LayoutMap)
    assert isinstance(env.bindings["DEPTH0"].value, DepthMap)
    assert isinstance(env.bindings["SEM0"].value, SemanticMap)
    tex = env.bindings["TEX0"].value
    assert isinstance(tex, TextureValue)
    assert tex.image.grid == config.grid
    room = env.bindings["ROOM0"].value
    assert isinstance(room, RoomMesh)
    assert room.plan_bbox() == pytest.approx((0.0, 0.0, 4.0, 3.0))
    furn = env.bindings["FURN0"].value
    assert isinstance(furn, FurnitureValue)
    assert furn.layout.items
    scene = env.bindings["SCENE0"].value
    assert scene.room is room
    assert len(scene.placements) == len(furn.layout.items)


def test_edit_texture_keeps_unmentioned_surfaces(config, registry):
    env = execute(parse_program(CANONICAL), Environment(), registry)
    edit = parse_program(
        "TEX1=EditTexture(texture=TEX0, instruction='make the walls green "
        "tiles')\n", predefined=set(env.types()))
    env = execute(edit, env, registry)
    before = env.bindings["TEX0"].value.spec
    after = env.bindings["TEX1"].value.spec
    assert after.surfaces["floor"] == before.surfaces["floor"]
    assert after.surfaces["walls"] != before.surfaces["walls"]
    assert after.surfaces["walls"].pattern == "tiles"


def test_empty_edit_instruction_keeps_the_spec(config, registry):
    env = execute(parse_program(CANONICAL), Environment(), registry)
    edit = parse_program("TEX1=EditTexture(texture=TEX0, instruction='')\n",
                         predefined=set(env.types()))
    env = execute(edit, env, registry)
    assert env.bindings["TEX1"].value.spec.surfaces == \
        env.bindings["TEX0"].value.spec.surfaces


def test_furniture_edit_through_the_registry(config, registry):
    program = parse_program(
        "SHAPE0=GenShape(instruction='Create a 4m by 4m bedroom')\n"
        "FURN0=GenFurniture(shape=SHAPE0, room_type='bedroom')\n"
        "FURN1=EditFurniture(furniture=FURN0, instruction='Remove the bed')\n")
    env = execute(program, Environment(), registry)
    assert env.bindings["FURN0"].value.layout.find("bed")
    assert not env.bindings["FURN1"].value.layout.find("bed")


def test_load_room_unconfigured_fails_with_line(config, registry):
    program = parse_program(
        "SHAPE0=GenShape(instruction='Create a 4m by 4m bedroom')\n"
        "OLD=LoadRoom(session='abc')\n")
    with pytest.raises(ExecutionError) as err:
        execute(program, Environment(), registry)
    assert err.value.line == 2
    # execution stopped after the first statement; its binding survives
    assert "SHAPE0" in err.value.env.bindings


def test_execute_rejects_ill_typed_programs(registry):
    bad = parse_program("LAYOUT0=GenLayout(shape='not a shape')\n")
    with pytest.raises(ValueError):
        execute(bad, Environment(), registry)
