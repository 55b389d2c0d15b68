"""Prompt assembly, the mock chat backend's rule tables, and program
generation with its repair round."""

import pytest

from roomsynth.dsl import parse_program
from roomsynth.llm import (ChatBackend, GenerationError, MockChatBackend,
                           assemble_prompt, edit_shape, gen_shape,
                           generate_program, load_default_store, room_type_of)
from roomsynth.pipeline import PipelineConfig, build_registry
from roomsynth.shapes import ShapeError, signed_area


@pytest.fixture(scope="module")
def store():
    return load_default_store()


@pytest.fixture(scope="module")
def registry():
    return build_registry(PipelineConfig())


# ---------------------------------------------------------------------------
# prompt assembly
# ---------------------------------------------------------------------------

def test_assemble_prompt_orders_examples():
    bundle = assemble_prompt("task", [("a", "ra"), ("b", "rb")], "do it")
    assert bundle.system == "task"
    assert len(bundle.assistant) == 2
    assert bundle.assistant[0] == "instruction: a\nresponse:\nra"
    assert bundle.user == "do it"


def test_assemble_prompt_is_deterministic():
    args = ("task", [("a", "ra")], "go")
    assert assemble_prompt(*args).render() == assemble_prompt(*args).render()


def test_assemble_prompt_rejects_blank_instruction():
    with pytest.raises(ValueError):
        assemble_prompt("task", [], "   ")


def test_default_store_is_complete(store):
    assert len(store.program_examples) >= 3
    assert len(store.shape_examples) >= 2
    assert len(store.task_texts) == 5


def test_stored_programs_all_parse(store):
    import re
    for instruction, response in store.program_examples:
        predefined = {m.group(1) for m in
                      re.finditer(r"(\w+)\s+\w+[,)]", instruction)
                      if "context" in instruction}
        program = parse_program(response, predefined=predefined)
        assert program.statements


def test_base_backend_is_abstract():
    with pytest.raises(NotImplementedError):
        ChatBackend().complete(assemble_prompt("t", [], "x"))


# ---------------------------------------------------------------------------
# shape generation and editing
# ---------------------------------------------------------------------------

def test_gen_shape_square(store):
    shape = gen_shape("Create a square bedroom 4m by 4m", MockChatBackend(),
                      store)
    assert shape.floor_corners == ((0, 0), (4, 0), (4, 4), (0, 4))
    assert shape.ceiling_height == 2.8


def test_gen_shape_l_shaped_with_notch(store):
    shape = gen_shape("An L-shaped living room, 6m by 4m with a 2m notch",
                      MockChatBackend(), store)
    assert len(shape.floor_corners) == 6
    assert signed_area(shape.corners) == pytest.approx(20.0)


def test_gen_shape_ceiling_height(store):
    shape = gen_shape("A 3m by 3m office with a ceiling height of 3.2m",
                      MockChatBackend(), store)
    assert shape.ceiling_height == 3.2


def test_gen_shape_defaults(store):
    shape = gen_shape("Make me a cozy room", MockChatBackend(), store)
    assert shape.floor_corners == ((0, 0), (4, 0), (4, 4), (0, 4))


def test_edit_shape_increase_width(store):
    base = gen_shape("A 4m by 4m bedroom", MockChatBackend(), store)
    out = edit_shape(base, "Increase the width by 1m", MockChatBackend(),
                     store)
    assert out.floor_corners == ((0, 0), (5, 0), (5, 4), (0, 4))
    assert out.ceiling_height == base.ceiling_height


def test_edit_shape_scale_to(store):
    base = gen_shape("A 4m by 4m bedroom", MockChatBackend(), store)
    out = edit_shape(base, "Scale it to 6m by 3m", MockChatBackend(), store)
    assert out.floor_corners == ((0, 0), (6, 0), (6, 3), (0, 3))


def test_edit_shape_raise_ceiling(store):
    base = gen_shape("A 4m by 4m bedroom", MockChatBackend(), store)
    out = edit_shape(base, "Raise the ceiling to 3m", MockChatBackend(), store)
    assert out.ceiling_height == 3.0
    assert out.floor_corners == base.floor_corners


def test_edit_shape_invalid_result_raises(store):
    base = gen_shape("A 4m by 4m bedroom", MockChatBackend(), store)
    with pytest.raises(ShapeError):
        edit_shape(base, "Decrease the width by 4m", MockChatBackend(), store)
    assert base.floor_corners == ((0, 0), (4, 0), (4, 4), (0, 4))


def test_room_type_of():
    assert room_type_of("Furnish my living room please") == "livingroom"
    assert room_type_of("just a room") == "bedroom"


# ---------------------------------------------------------------------------
# program generation
# ---------------------------------------------------------------------------

def test_full_program_with_furnishing(store, registry):
    text = generate_program(
        "Create a 5m by 4m bedroom with a wooden floor, and furnish it",
        MockChatBackend(), store, registry)
    program = parse_program(text)
    modules = [st.module for st in program.statements]
    assert modules == ["GenShape", "GenLayout", "GenDepth", "GenSemantic",
                       "GenTexture", "GenEmptyRoom", "GenFurniture", "Merge"]
    targets = [st.target for st in program.statements]
    assert targets == ["SHAPE0", "LAYOUT0", "DEPTH0", "SEM0", "TEX0", "ROOM0",
                       "FURN0", "SCENE0"]
    assert program.statements[6].arg_dict["room_type"] == "bedroom"


def test_program_without_furnishing_is_six_lines(store, registry):
    text = generate_program("Create a 4m by 3m office with white walls",
                            MockChatBackend(), store, registry)
    assert len(parse_program(text).statements) == 6


def test_texture_edit_uses_context(store, registry):
    context = {"SHAPE0": "shape", "LAYOUT0": "layout_map",
               "DEPTH0": "depth_map", "SEM0": "semantic_map",
               "TEX0": "texture", "ROOM0": "mesh"}
    text = generate_program("Change the floor to dark blue tiles",
                            MockChatBackend(), store, registry, context)
    program = parse_program(text, predefined=set(context))
    assert [st.module for st in program.statements] == \
        ["EditTexture", "EditEmptyRoom"]
    assert program.statements[0].arg_dict["texture"].name == "TEX0"
    assert [st.target for st in program.statements] == ["TEX1", "ROOM1"]


def test_furniture_edit_is_a_single_statement(store, registry):
    context = {"SHAPE0": "shape", "TEX0": "texture", "ROOM0": "mesh",
               "FURN0": "furniture"}
    text = generate_program("Replace the table with a wardrobe",
                            MockChatBackend(), store, registry, context)
    program = parse_program(text, predefined=set(context))
    (st,) = program.statements
    assert st.module == "EditFurniture"
    assert st.target == "FURN1"
    assert st.arg_dict["furniture"].name == "FURN0"
    assert st.arg_dict["instruction"] == "Replace the table with a wardrobe"


def test_shape_edit_regenerates_the_chain(store, registry):
    context = {"SHAPE0": "shape", "LAYOUT0": "layout_map",
               "DEPTH0": "depth_map", "SEM0": "semantic_map",
               "TEX0": "texture", "ROOM0": "mesh"}
    text = generate_program("Increase the width by 1m", MockChatBackend(),
                            store, registry, context)
    program = parse_program(text, predefined=set(context))
    assert [st.module for st in program.statements] == \
        ["EditShape", "EditLayout", "EditDepth", "EditSemantic",
         "EditTexture", "EditEmptyRoom"]
    assert program.statements[0].arg_dict["shape"].name == "SHAPE0"


def test_fresh_indices_skip_existing_ones(store, registry):
    context = {"SHAPE0": "shape", "TEX0": "texture", "ROOM0": "mesh",
               "TEX3": "texture", "ROOM3": "mesh"}
    text = generate_program("Paint the walls green", MockChatBackend(), store,
                            registry, context)
    program = parse_program(text, predefined=set(context))
    assert program.statements[0].target == "TEX4"
    # the latest texture variable is the edit source
    assert program.statements[0].arg_dict["texture"].name == "TEX3"


def test_code_fences_are_stripped(store, registry):
    class FencedBackend(MockChatBackend):
        def complete(self, bundle, temperature=0.0, seed=0):
            return "```python\n" + super().complete(bundle) + "```"

    text = generate_program("Create a 4m by 4m bedroom", FencedBackend(),
                            store, registry)
    assert not text.startswith("```")
    assert len(parse_program(text).statements) == 6


def test_repair_round_recovers_from_one_bad_reply(store, registry):
    class FlakyBackend(MockChatBackend):
        def __init__(self):
            self.calls = 0

        def complete(self, bundle, temperature=0.0, seed=0):
            self.calls += 1
            if self.calls == 1:
                return "Sure! Here is a lovely room for you."
            return super().complete(bundle)

    backend = FlakyBackend()
    text = generate_program("Create a 4m by 4m bedroom", backend, store,
                            registry)
    assert backend.calls == 2
    assert len(parse_program(text).statements) == 6


def test_persistent_prose_raises_with_transcripts(store, registry):
    class ProseBackend(ChatBackend):
        def complete(self, bundle, temperature=0.0, seed=0):
            return "I would recommend a minimalist aesthetic."

    with pytest.raises(GenerationError) as err:
        generate_program("Create a 4m by 4m bedroom", ProseBackend(), store,
                         registry)
    assert len(err.value.transcripts) == 2
    prompt, completion = err.value.transcripts[1]
    assert "minimalist" in completion
    assert "invalid" in prompt


def test_typecheck_failures_also_trigger_repair(store, registry):
    class MistypedBackend(ChatBackend):
        def complete(self, bundle, temperature=0.0, seed=0):
            return ("SHAPE0=GenShape(instruction='x')\n"
                    "TEX0=GenTexture(semantic=SHAPE0, depth=SHAPE0, "
                    "instruction='x')\n")

    with pytest.raises(GenerationError):
        generate_program("Create a room", MistypedBackend(), store, registry)
