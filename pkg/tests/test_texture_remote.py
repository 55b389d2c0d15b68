import io
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest
from PIL import Image

from roomsynth.panorama import TextureImage, gen_depth, gen_layout, gen_semantic
from roomsynth.projection import PanoramaGrid
from roomsynth.shapes import default_camera
from roomsynth.texture_remote import (DimensionMismatch, MalformedResponse,
                                      RemoteTextureBackend, RemoteTimeout,
                                      RemoteUnreachable,
                                      WrapContinuityViolation)
from conftest import rect_room

GRID = PanoramaGrid(width=64, height=32)


def _png(width, height, left_col=None):
    arr = np.full((height, width, 3), 120, dtype=np.uint8)
    if left_col is not None:
        arr[:, 0, :] = left_col
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        body = self.rfile.read(int(self.headers["Content-Length"]))
        self.server.last_body = body
        mode = self.server.mode
        if mode == "slow":
            time.sleep(3.0)
        if mode == "error":
            self.send_response(500)
            self.end_headers()
            return
        if mode == "garbage":
            payload = b"this is not a png"
        elif mode == "wrong_size":
            payload = _png(128, 64)
        elif mode == "seam":
            payload = _png(GRID.width, GRID.height, left_col=255)
        else:
            payload = _png(GRID.width, GRID.height)
        self.send_response(200)
        self.send_header("Content-Type", "image/png")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def stub():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    server.mode = "ok"
    server.last_body = None
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()


@pytest.fixture(scope="module")
def maps():
    shape = rect_room(4, 3)
    cam = default_camera(shape)
    layout = gen_layout(shape, cam, GRID)
    return layout, gen_depth(shape, cam, GRID), gen_semantic(layout, GRID)


def _backend(server, timeout=5.0):
    host, port = server.server_address
    return RemoteTextureBackend(endpoint=f"http://{host}:{port}/generate",
                                timeout=timeout)


def test_valid_echo_accepted(stub, maps):
    stub.mode = "ok"
    image = _backend(stub).generate(*maps, text="plain walls", seed=7)
    assert isinstance(image, TextureImage)
    assert image.grid == GRID
    assert np.all(image.data == 120)


def test_request_carries_all_parts(stub, maps):
    stub.mode = "ok"
    _backend(stub).generate(*maps, text="marker-text-xyz", seed=42)
    body = stub.last_body
    for name in (b'name="layout"', b'name="depth"', b'name="semantic"',
                 b'name="text"', b'name="seed"'):
        assert name in body
    assert b"marker-text-xyz" in body
    assert b"42" in body


def test_wrong_dimensions_rejected(stub, maps):
    stub.mode = "wrong_size"
    with pytest.raises(DimensionMismatch):
        _backend(stub).generate(*maps, text="x")


def test_timeout_raises(stub, maps):
    stub.mode = "slow"
    try:
        with pytest.raises(RemoteTimeout):
            _backend(stub, timeout=0.3).generate(*maps, text="x")
    finally:
        stub.mode = "ok"


def test_undecodable_body_rejected(stub, maps):
    stub.mode = "garbage"
    with pytest.raises(MalformedResponse):
        _backend(stub).generate(*maps, text="x")


def test_http_error_rejected(stub, maps):
    stub.mode = "error"
    with pytest.raises(MalformedResponse):
        _backend(stub).generate(*maps, text="x")


def test_seam_discontinuity_rejected(stub, maps):
    stub.mode = "seam"
    with pytest.raises(WrapContinuityViolation):
        _backend(stub).generate(*maps, text="x")


def test_unreachable_endpoint(maps):
    backend = RemoteTextureBackend(endpoint="http://127.0.0.1:9/generate",
                                   timeout=1.0)
    with pytest.raises(RemoteUnreachable):
        backend.generate(*maps, text="x")
