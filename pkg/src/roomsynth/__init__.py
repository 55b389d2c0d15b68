"""Instruction-driven room synthesis toolkit."""

from .projection import PanoramaGrid, pixel_to_ray, project_spherical, spherical_to_uv
from .shapes import (CameraPose, Opening, RoomShape, ShapeError, default_camera,
                     parse_shape, serialize_shape, validate_shape)
from .panorama import (CEILING, DOOR, FLOOR, WALL, WINDOW, DepthMap, Layout1D,
                       LayoutMap, SemanticMap, TextureImage, encode_layout_1d,
                       gen_depth, gen_layout, gen_semantic, layout_1d_distance)
from .oracle import raycast_oracle
from .textures import (SurfaceSpec, TextureSpec, gen_texture_procedural,
                       parse_texture_spec, wrap_continuity_error)
from .meshes import RoomMesh, build_empty_room, scale_mesh
from .obj_io import export_mesh, import_mesh
from .dsl import (Environment, ModuleRegistry, Program, ProgramError, execute,
                  parse_program, serialize_program, typecheck)
from .furniture import (FurnitureItem, FurnitureLayout, Scene, edit_furniture,
                        gen_furniture, merge, parse_furniture_css,
                        serialize_furniture_css)
from .llm import (ChatBackend, GenerationError, MockChatBackend,
                  generate_program)
from .pipeline import PipelineConfig, build_registry
from .session import SessionStore
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "PanoramaGrid", "pixel_to_ray", "project_spherical", "spherical_to_uv",
    "CameraPose", "Opening", "RoomShape", "ShapeError", "default_camera",
    "parse_shape", "serialize_shape", "validate_shape",
    "CEILING", "DOOR", "FLOOR", "WALL", "WINDOW",
    "DepthMap", "Layout1D", "LayoutMap", "SemanticMap", "TextureImage",
    "encode_layout_1d", "gen_depth", "gen_layout", "gen_semantic",
    "layout_1d_distance", "raycast_oracle",
    "SurfaceSpec", "TextureSpec", "gen_texture_procedural",
    "parse_texture_spec", "wrap_continuity_error",
    "RoomMesh", "build_empty_room", "scale_mesh", "export_mesh", "import_mesh",
    "Environment", "ModuleRegistry", "Program", "ProgramError", "execute",
    "parse_program", "serialize_program", "typecheck",
    "FurnitureItem", "FurnitureLayout", "Scene", "edit_furniture",
    "gen_furniture", "merge", "parse_furniture_css", "serialize_furniture_css",
    "ChatBackend", "GenerationError", "MockChatBackend", "generate_program",
    "PipelineConfig", "build_registry", "SessionStore", "create_app",
]
