import numpy as np
import pytest

from roomsynth.shapes import CameraPose, RoomShape, default_camera


def rect_room(w=4.0, d=4.0, height=2.8, **kw):
    return RoomShape(floor_corners=((0, 0), (w, 0), (w, d), (0, d)),
                     ceiling_height=height, **kw)


def l_room(w=6.0, d=4.0, notch_w=2.0, notch_d=2.0, height=2.8, **kw):
    # notch cut from the (w, d) corner
    return RoomShape(
        floor_corners=((0, 0), (w, 0), (w, d - notch_d), (w - notch_w, d - notch_d),
                       (w - notch_w, d), (0, d)),
        ceiling_height=height, **kw)


def random_rooms(n_rect, n_l, rng):
    rooms = []
    for _ in range(n_rect):
        w = rng.uniform(2.5, 8.0)
        d = rng.uniform(2.5, 8.0)
        h = rng.uniform(2.4, 3.2)
        rooms.append(rect_room(w, d, h))
    for _ in range(n_l):
        w = rng.uniform(4.0, 8.0)
        d = rng.uniform(4.0, 8.0)
        nw = rng.uniform(1.0, w / 2 - 0.5)
        nd = rng.uniform(1.0, d / 2 - 0.5)
        h = rng.uniform(2.4, 3.2)
        rooms.append(l_room(w, d, nw, nd, h))
    return rooms


def camera_for(shape, rng=None, yaw=0.0):
    cam = default_camera(shape, yaw=yaw)
    if rng is not None:
        h = rng.uniform(1.2, min(2.0, shape.ceiling_height - 0.3))
        cam = CameraPose(position=cam.position, height=h, yaw=yaw)
    return cam


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
