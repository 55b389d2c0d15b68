"""Command-line entry points: run, replay, export, serve, bench.

Configuration is resolved in order: built-in defaults, then a JSON config
file (--config or ROOMSYNTH_CONFIG), then environment variables, then
command-line flags.  Recognized keys / variables:

    grid        "512x256"            ROOMSYNTH_GRID
    seed        integer              ROOMSYNTH_SEED
    subdivision degrees              ROOMSYNTH_SUBDIVISION
    backend     "mock"               ROOMSYNTH_BACKEND
    prompts     prompt pack dir      ROOMSYNTH_PROMPTS
    texture_url remote PRIG service  ROOMSYNTH_TEXTURE_URL
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from . import llm, raster_io
from .obj_io import export_mesh
from .pipeline import PipelineConfig
from .projection import PanoramaGrid
from .session import SessionStore
from .texture_remote import RemoteTextureBackend

_DEFAULTS = {"grid": "512x256", "seed": 0, "subdivision": 5.0,
             "backend": "mock", "prompts": None, "texture_url": None}

_ENV_KEYS = {"grid": "ROOMSYNTH_GRID", "seed": "ROOMSYNTH_SEED",
             "subdivision": "ROOMSYNTH_SUBDIVISION",
             "backend": "ROOMSYNTH_BACKEND", "prompts": "ROOMSYNTH_PROMPTS",
             "texture_url": "ROOMSYNTH_TEXTURE_URL"}


def resolve_settings(config_path=None, overrides=None) -> dict:
    settings = dict(_DEFAULTS)
    path = config_path or os.environ.get("ROOMSYNTH_CONFIG")
    if path:
        loaded = json.loads(Path(path).read_text())
        unknown = set(loaded) - set(_DEFAULTS)
        if unknown:
            raise click.ClickException(
                f"unknown config keys: {', '.join(sorted(unknown))}")
        settings.update(loaded)
    for key, var in _ENV_KEYS.items():
        if os.environ.get(var):
            settings[key] = os.environ[var]
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    return settings


def build_pipeline_config(settings: dict) -> PipelineConfig:
    try:
        width, height = (int(v) for v in str(settings["grid"]).split("x"))
    except ValueError:
        raise click.ClickException(f"bad grid {settings['grid']!r}; "
                                   "expected WIDTHxHEIGHT")
    if settings["backend"] != "mock":
        raise click.ClickException(
            f"unknown chat backend {settings['backend']!r} (only 'mock' "
            "ships with this package)")
    store = llm.load_store(settings["prompts"]) if settings["prompts"] \
        else None
    texture = RemoteTextureBackend(endpoint=settings["texture_url"]) \
        if settings["texture_url"] else None
    return PipelineConfig(grid=PanoramaGrid(width, height),
                          seed=int(settings["seed"]),
                          subdivision_deg=float(settings["subdivision"]),
                          store=store, texture_backend=texture)


def _common(func):
    func = click.option("--store", "store_dir", default="roomsynth-store",
                        show_default=True,
                        help="Session store directory.")(func)
    func = click.option("--config", "config_path", default=None,
                        help="JSON config file.")(func)
    func = click.option("--grid", default=None, help="Panorama WIDTHxHEIGHT.")(func)
    func = click.option("--seed", type=int, default=None)(func)
    return func


def _config_factory(config_path, grid, seed):
    def factory():
        settings = resolve_settings(config_path, {"grid": grid, "seed": seed})
        return build_pipeline_config(settings)
    return factory


@click.group()
def main():
    """Room synthesis sessions: natural language in, textured meshes out."""


@main.command()
@click.argument("instruction", nargs=-1, required=True)
@click.option("--session", "session_id", default=None,
              help="Existing session to continue; omitted = new session.")
@_common
def run(instruction, session_id, store_dir, config_path, grid, seed):
    """Run INSTRUCTION (one or more) against a session."""
    store = SessionStore(store_dir)
    factory = _config_factory(config_path, grid, seed)
    if session_id is None:
        session_id = store.create()
        click.echo(f"session {session_id}")
    for text in instruction:
        step = store.run_instruction(session_id, text, factory())
        click.echo(f"step {step.index}: {step.status}  ({text})")
        if step.status == "failed":
            click.echo(step.error)
            raise SystemExit(1)
        for rec in step.bindings:
            click.echo(f"  {rec.name}: {rec.type}  {rec.digest[:12]}")


@main.command()
@click.argument("session_id")
@_common
def replay(session_id, store_dir, config_path, grid, seed):
    """Re-run a session's instructions from scratch and compare digests."""
    store = SessionStore(store_dir)
    factory = _config_factory(config_path, grid, seed)
    source = store.load(session_id)
    fresh = store.create()
    for step in source.steps:
        redone = store.run_instruction(fresh, step.instruction, factory())
        click.echo(f"step {redone.index}: {redone.status}")
    want = {name: rec.digest for name, rec in source.bindings.items()}
    got = {name: rec.digest
           for name, rec in store.load(fresh).bindings.items()}
    if want == got:
        click.echo(f"replay {fresh} reproduces all "
                   f"{len(want)} binding digests")
    else:
        differing = sorted(set(want) ^ set(got) |
                           {n for n in want.keys() & got.keys()
                            if want[n] != got[n]})
        raise click.ClickException(f"digest mismatch: {', '.join(differing)}")


@main.command()
@click.argument("session_id")
@click.option("--out", "out_dir", required=True,
              help="Destination directory.")
@click.option("--step", "step_n", type=int, default=None,
              help="Export the environment as of this step.")
@click.option("--y-up", is_flag=True, help="Export meshes y-up.")
@_common
def export(session_id, out_dir, step_n, y_up, store_dir, config_path, grid,
           seed):
    """Write a session's maps and meshes to plain files."""
    store = SessionStore(store_dir)
    env = store.load_environment(session_id, step=step_n)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for name, binding in sorted(env.bindings.items()):
        value, type_ = binding.value, binding.type
        if type_ == "layout_map":
            (out / f"{name}.png").write_bytes(
                raster_io.layout_to_png_bytes(value))
        elif type_ == "semantic_map":
            (out / f"{name}.png").write_bytes(
                raster_io.semantic_to_png_bytes(value))
        elif type_ == "depth_map":
            (out / f"{name}.npy").write_bytes(
                raster_io.depth_to_npy_bytes(value))
        elif type_ == "texture":
            (out / f"{name}.png").write_bytes(
                raster_io.texture_to_png_bytes(value.image))
        elif type_ == "mesh":
            export_mesh(value, out / name, y_up=y_up)
        elif type_ == "furniture":
            from .furniture import serialize_furniture_css
            (out / f"{name}.css").write_text(
                serialize_furniture_css(value.layout))
        else:
            continue
        written += 1
        click.echo(f"wrote {name} ({type_})")
    if not written:
        raise click.ClickException("nothing exportable in this session")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@_common
def serve(host, port, store_dir, config_path, grid, seed):
    """Serve the session HTTP API."""
    import uvicorn

    from .service import create_app
    app = create_app(SessionStore(store_dir),
                     _config_factory(config_path, grid, seed))
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--grid", default="512x256", show_default=True)
@click.option("--rooms", type=int, default=8, show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True)
def bench(grid, rooms, repeats):
    """Benchmark the numba kernels against the numpy fallback."""
    from .bench import format_results, run_benchmark
    width, height = (int(v) for v in grid.split("x"))
    click.echo(format_results(run_benchmark(width, height, rooms, repeats)))


if __name__ == "__main__":
    main()
