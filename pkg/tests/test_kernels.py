"""Cross-checks between the numba and pure-numpy kernel implementations."""

import numpy as np

from roomsynth import kernels
from roomsynth.kernels import _plan_hits_loop, _plan_hits_numpy, _raycast_numpy
from conftest import l_room, rect_room


def _inputs():
    shape = l_room()
    az = np.linspace(-np.pi + 0.01, np.pi, 173)
    a = np.linspace(-1.5, 1.5, 97)
    return shape, np.sin(az), np.cos(az), np.sin(a), np.cos(a)


def test_plan_hits_paths_agree():
    shape, st, ct, _, _ = _inputs()
    cs_np, e_np, off_np = _plan_hits_numpy(st, ct, 2.0, 1.5, shape.edges)
    n = st.shape[0]
    cs = np.empty(n)
    edge = np.empty(n, dtype=np.int64)
    off = np.empty(n)
    _plan_hits_loop(st, ct, 2.0, 1.5, shape.edges, cs, edge, off)
    np.testing.assert_array_equal(cs_np, cs)
    np.testing.assert_array_equal(e_np, edge)
    np.testing.assert_array_equal(off_np, off)


def test_raycast_paths_agree():
    shape, st, ct, sa, ca = _inputs()
    got_active = kernels.raycast(st, ct, sa, ca, 2.0, 1.5, -1.6, 1.2, shape.edges)
    got_numpy = _raycast_numpy(st, ct, sa, ca, 2.0, 1.5, -1.6, 1.2, shape.edges)
    for a_arr, b_arr in zip(got_active, got_numpy):
        np.testing.assert_array_equal(np.asarray(a_arr), np.asarray(b_arr))


def test_plan_hits_square_room_distances():
    shape = rect_room(4, 4)
    # facing +y wall from the center: distance exactly 2
    st = np.array([0.0])
    ct = np.array([1.0])
    cs, edge, off = kernels.plan_hits(st, ct, 2.0, 2.0, shape.edges)
    assert cs[0] == 2.0
    # edge 2 runs (4,4)->(0,4); hit at its midpoint
    assert edge[0] == 2
    assert off[0] == 0.5


def test_backend_flag_reported():
    assert kernels.BACKEND in ("numba", "numpy")
    assert kernels.use_numba() == (kernels.BACKEND == "numba")
