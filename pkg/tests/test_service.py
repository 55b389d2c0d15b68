"""HTTP API over the session store, exercised with the ASGI test client."""

import hashlib

import pytest
from fastapi.testclient import TestClient

from roomsynth.pipeline import PipelineConfig
from roomsynth.projection import PanoramaGrid
from roomsynth.service import create_app
from roomsynth.session import SessionStore

CREATE = ("Create a 4m by 4m bedroom with a wooden floor and light gray "
          "walls, and furnish it")


def _factory():
    return PipelineConfig(grid=PanoramaGrid(128, 64), subdivision_deg=12.0)


@pytest.fixture
def client(tmp_path):
    app = create_app(SessionStore(tmp_path / "store"), _factory)
    return TestClient(app)


def _new_session(client):
    resp = client.post("/sessions")
    assert resp.status_code == 201
    return resp.json()["id"]


def test_create_session_is_empty(client):
    resp = client.post("/sessions")
    assert resp.status_code == 201
    body = resp.json()
    assert body["steps"] == []
    assert body["bindings"] == {}


def test_run_instruction_returns_step_with_urls(client):
    sid = _new_session(client)
    resp = client.post(f"/sessions/{sid}/instructions",
                       json={"instruction": CREATE})
    assert resp.status_code == 200
    step = resp.json()
    assert step["status"] == "ok"
    assert step["index"] == 1
    names = sorted(b["name"] for b in step["bindings"])
    assert names == ["DEPTH0", "FURN0", "LAYOUT0", "ROOM0", "SCENE0",
                     "SEM0", "SHAPE0", "TEX0"]
    for binding in step["bindings"]:
        assert binding["url"] == f"/artifacts/{binding['digest']}"


def test_artifacts_are_content_addressed_and_immutable(client):
    sid = _new_session(client)
    step = client.post(f"/sessions/{sid}/instructions",
                       json={"instruction": CREATE}).json()
    binding = next(b for b in step["bindings"] if b["name"] == "SEM0")
    resp = client.get(binding["url"])
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    assert "immutable" in resp.headers["cache-control"]
    assert hashlib.sha256(resp.content).hexdigest() == binding["digest"]


def test_get_session_and_step(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/instructions", json={"instruction": CREATE})
    client.post(f"/sessions/{sid}/instructions",
                json={"instruction": "Change the floor to red tiles"})
    body = client.get(f"/sessions/{sid}").json()
    assert len(body["steps"]) == 2
    assert {"SHAPE0", "TEX1", "ROOM1"} <= set(body["bindings"])
    step2 = client.get(f"/sessions/{sid}/steps/2").json()
    assert sorted(b["name"] for b in step2["bindings"]) == ["ROOM1", "TEX1"]


def test_not_found_paths(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/instructions",
                       json={"instruction": "x"}).status_code == 404
    sid = _new_session(client)
    assert client.get(f"/sessions/{sid}/steps/1").status_code == 404
    assert client.get("/artifacts/" + "0" * 64).status_code == 404
    assert client.get("/artifacts/not-a-digest").status_code == 404


def test_blank_instruction_rejected(client):
    sid = _new_session(client)
    resp = client.post(f"/sessions/{sid}/instructions",
                       json={"instruction": "   "})
    assert resp.status_code == 400


def test_fork_via_query_parameter(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/instructions", json={"instruction": CREATE})
    client.post(f"/sessions/{sid}/instructions",
                json={"instruction": "Change the floor to red tiles"})
    resp = client.post("/sessions", params={"from": f"{sid},1"})
    assert resp.status_code == 201
    fork = resp.json()
    assert fork["id"] != sid
    assert len(fork["steps"]) == 1
    # the fork diverges independently of the original
    client.post(f"/sessions/{fork['id']}/instructions",
                json={"instruction": "Paint the walls green"})
    orig = client.get(f"/sessions/{sid}").json()
    forked = client.get(f"/sessions/{fork['id']}").json()
    assert orig["bindings"]["TEX1"]["digest"] != \
        forked["bindings"]["TEX1"]["digest"]
    assert orig["bindings"]["SHAPE0"]["digest"] == \
        forked["bindings"]["SHAPE0"]["digest"]


def test_fork_error_codes(client):
    assert client.post("/sessions",
                       params={"from": "missing,1"}).status_code == 404
    sid = _new_session(client)
    assert client.post("/sessions",
                       params={"from": f"{sid},7"}).status_code == 400
    assert client.post("/sessions",
                       params={"from": f"{sid},x"}).status_code == 400


def test_failed_step_is_visible(client, tmp_path):
    from roomsynth.llm import ChatBackend

    class ProseBackend(ChatBackend):
        def complete(self, bundle, temperature=0.0, seed=0):
            return "nope"

    def factory():
        config = _factory()
        config.backend = ProseBackend()
        return config

    client = TestClient(create_app(SessionStore(tmp_path / "s2"), factory))
    sid = _new_session(client)
    resp = client.post(f"/sessions/{sid}/instructions",
                       json={"instruction": "Create a room"})
    step = resp.json()
    assert step["status"] == "failed"
    assert step["bindings"] == []
    assert step["error"]
    assert client.get(f"/sessions/{sid}").json()["bindings"] == {}
