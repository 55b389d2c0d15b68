"""CLI subcommands and configuration resolution."""

import json

import pytest
from click.testing import CliRunner

from roomsynth.cli import build_pipeline_config, main, resolve_settings

CREATE = "Create a 4m by 4m bedroom with a wooden floor, and furnish it"


@pytest.fixture
def runner():
    return CliRunner()


def _run(runner, store, *args):
    return runner.invoke(main, list(args) + ["--store", str(store),
                                             "--grid", "128x64"],
                         catch_exceptions=False)


def test_run_creates_a_session_and_prints_bindings(runner, tmp_path):
    result = _run(runner, tmp_path / "s", "run", CREATE)
    assert result.exit_code == 0
    assert "session " in result.output
    assert "step 1: ok" in result.output
    assert "SCENE0: scene" in result.output


def test_run_continues_an_existing_session(runner, tmp_path):
    store = tmp_path / "s"
    first = _run(runner, store, "run", CREATE)
    sid = first.output.split()[1]
    second = _run(runner, store, "run", "Change the floor to red tiles",
                  "--session", sid)
    assert second.exit_code == 0
    assert "step 2: ok" in second.output
    assert "TEX1: texture" in second.output


def test_replay_confirms_digests(runner, tmp_path):
    store = tmp_path / "s"
    first = _run(runner, store, "run", CREATE,
                 "Change the floor to red tiles")
    sid = first.output.split()[1]
    result = _run(runner, store, "replay", sid)
    assert result.exit_code == 0
    assert "reproduces all" in result.output


def test_export_writes_maps_and_mesh(runner, tmp_path):
    store = tmp_path / "s"
    first = _run(runner, store, "run", CREATE)
    sid = first.output.split()[1]
    out = tmp_path / "exported"
    result = _run(runner, store, "export", sid, "--out", str(out))
    assert result.exit_code == 0
    assert (out / "LAYOUT0.png").exists()
    assert (out / "SEM0.png").exists()
    assert (out / "DEPTH0.npy").exists()
    assert (out / "TEX0.png").exists()
    assert (out / "FURN0.css").exists()
    assert (out / "ROOM0" / "room.obj").exists()
    assert (out / "ROOM0" / "room.mtl").exists()
    assert (out / "ROOM0" / "room_texture.png").exists()


def test_export_y_up_flag(runner, tmp_path):
    store = tmp_path / "s"
    sid = _run(runner, store, "run", CREATE).output.split()[1]
    out = tmp_path / "yup"
    result = _run(runner, store, "export", sid, "--out", str(out), "--y-up")
    assert result.exit_code == 0
    text = (out / "ROOM0" / "room.obj").read_text()
    assert "v " in text


def test_export_empty_session_fails(runner, tmp_path):
    store = tmp_path / "s"
    from roomsynth.session import SessionStore
    sid = SessionStore(store).create()
    result = runner.invoke(main, ["export", sid, "--out",
                                  str(tmp_path / "o"), "--store", str(store)])
    assert result.exit_code != 0
    assert "nothing exportable" in result.output


def test_bad_grid_is_a_usage_error(runner, tmp_path):
    result = runner.invoke(main, ["run", "x", "--store",
                                  str(tmp_path / "s"), "--grid", "huge"])
    assert result.exit_code != 0
    assert "bad grid" in result.output


def test_settings_precedence(tmp_path, monkeypatch):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"grid": "256x128", "seed": 7}))
    settings = resolve_settings(config)
    assert settings["grid"] == "256x128"
    assert settings["seed"] == 7
    monkeypatch.setenv("ROOMSYNTH_GRID", "128x64")
    settings = resolve_settings(config)
    assert settings["grid"] == "128x64"
    settings = resolve_settings(config, {"grid": "512x256"})
    assert settings["grid"] == "512x256"
    assert settings["subdivision"] == 5.0


def test_unknown_config_key_rejected(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"gird": "256x128"}))
    with pytest.raises(Exception, match="unknown config keys"):
        resolve_settings(config)


def test_build_config_applies_settings():
    config = build_pipeline_config(dict(grid="256x128", seed=3,
                                        subdivision=8.0, backend="mock",
                                        prompts=None, texture_url=None))
    assert config.grid.width == 256
    assert config.seed == 3
    assert config.subdivision_deg == 8.0
    assert config.texture_backend is None


def test_remote_texture_url_selects_the_remote_backend():
    from roomsynth.texture_remote import RemoteTextureBackend
    config = build_pipeline_config(dict(grid="256x128", seed=0,
                                        subdivision=5.0, backend="mock",
                                        prompts=None,
                                        texture_url="http://localhost:1/t"))
    assert isinstance(config.texture_backend, RemoteTextureBackend)


def test_bench_command_reports_both_backends(runner):
    result = runner.invoke(main, ["bench", "--grid", "64x32", "--rooms", "2",
                                  "--repeats", "1"])
    assert result.exit_code == 0, result.output
    assert "numba" in result.output
    assert "numpy" in result.output
    assert "speedup" in result.output
