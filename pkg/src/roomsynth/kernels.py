"""Hot geometry kernels with a numba fast path and a pure-numpy fallback.

The backend is selected once at import time from the ROOMSYNTH_NUMBA
environment variable ("0"/"false"/"off" force the numpy path).  Both paths
evaluate the same rational arithmetic on the same precomputed trig inputs,
so they agree to the last bit; transcendentals are always evaluated by
numpy at the call site and passed in.
"""

from __future__ import annotations

import os

import numpy as np

_EPS_T = 1e-12


def use_numba() -> bool:
    flag = os.environ.get("ROOMSYNTH_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


# ---------------------------------------------------------------------------
# Scalar-loop implementations (compiled by numba when enabled)
# ---------------------------------------------------------------------------

def _plan_hits_loop(sin_t, cos_t, ox, oy, edges, out_cs, out_edge, out_off):
    n = sin_t.shape[0]
    k = edges.shape[0]
    for i in range(n):
        dx = sin_t[i]
        dy = cos_t[i]
        best_t = np.inf
        best_e = -1
        best_s = 0.0
        for j in range(k):
            ax = edges[j, 0]
            ay = edges[j, 1]
            ex = edges[j, 2] - ax
            ey = edges[j, 3] - ay
            denom = dx * ey - dy * ex
            if denom == 0.0:
                continue
            rx = ax - ox
            ry = ay - oy
            t = (rx * ey - ry * ex) / denom
            s = (rx * dy - ry * dx) / denom
            if t > _EPS_T and 0.0 <= s <= 1.0 and t < best_t:
                best_t = t
                best_e = j
                best_s = s
        out_cs[i] = best_t
        out_edge[i] = best_e
        out_off[i] = best_s


def _raycast_loop(sin_t, cos_t, sin_a, cos_a, ox, oy, z_floor, z_ceil,
                  edges, out_depth, out_label, out_edge, out_s, out_z):
    w = sin_t.shape[0]
    h = sin_a.shape[0]
    k = edges.shape[0]
    for r in range(h):
        sa = sin_a[r]
        ca = cos_a[r]
        for c in range(w):
            dx = sin_t[c]
            dy = cos_t[c]
            best_t = np.inf
            best_label = 1
            best_edge = -1
            best_s = 0.0
            best_z = 0.0
            if sa < 0.0:
                tf = z_floor / sa
                if tf > _EPS_T and tf < best_t:
                    best_t = tf
                    best_label = 2
            elif sa > 0.0:
                tc = z_ceil / sa
                if tc > _EPS_T and tc < best_t:
                    best_t = tc
                    best_label = 0
            if ca > 0.0:
                for j in range(k):
                    ax = edges[j, 0]
                    ay = edges[j, 1]
                    ex = edges[j, 2] - ax
                    ey = edges[j, 3] - ay
                    denom = dx * ey - dy * ex
                    if denom == 0.0:
                        continue
                    rx = ax - ox
                    ry = ay - oy
                    tp = (rx * ey - ry * ex) / denom
                    s = (rx * dy - ry * dx) / denom
                    if tp > _EPS_T and 0.0 <= s <= 1.0:
                        t3 = tp / ca
                        z = t3 * sa
                        if z_floor <= z <= z_ceil and t3 < best_t:
                            best_t = t3
                            best_label = 1
                            best_edge = j
                            best_s = s
                            best_z = z
            out_depth[r, c] = best_t
            out_label[r, c] = best_label
            out_edge[r, c] = best_edge
            out_s[r, c] = best_s
            out_z[r, c] = best_z


# ---------------------------------------------------------------------------
# Vectorized numpy fallback
# ---------------------------------------------------------------------------

def _plan_hits_numpy(sin_t, cos_t, ox, oy, edges):
    dx = sin_t[:, None]
    dy = cos_t[:, None]
    ax = edges[None, :, 0]
    ay = edges[None, :, 1]
    ex = edges[None, :, 2] - ax
    ey = edges[None, :, 3] - ay
    denom = dx * ey - dy * ex
    rx = ax - ox
    ry = ay - oy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rx * ey - ry * ex) / denom
        s = (rx * dy - ry * dx) / denom
    valid = (denom != 0.0) & (t > _EPS_T) & (s >= 0.0) & (s <= 1.0)
    t = np.where(valid, t, np.inf)
    idx = np.argmin(t, axis=1)
    rows = np.arange(t.shape[0])
    cs = t[rows, idx]
    off = np.where(np.isfinite(cs), s[rows, idx], 0.0)
    edge = np.where(np.isfinite(cs), idx, -1)
    return cs, edge.astype(np.int64), off


def _raycast_numpy(sin_t, cos_t, sin_a, cos_a, ox, oy, z_floor, z_ceil, edges):
    w = sin_t.shape[0]
    h = sin_a.shape[0]
    sa = sin_a[:, None]
    ca = cos_a[:, None]

    with np.errstate(divide="ignore", invalid="ignore"):
        tf = z_floor / sa
        tc = z_ceil / sa
    t_best = np.full((h, w), np.inf)
    label = np.ones((h, w), dtype=np.int64)
    take_f = np.broadcast_to((sa < 0.0) & (tf > _EPS_T), (h, w))
    t_best = np.where(take_f, np.broadcast_to(tf, (h, w)), t_best)
    label = np.where(take_f, 2, label)
    take_c = np.broadcast_to((sa > 0.0) & (tc > _EPS_T), (h, w))
    t_best = np.where(take_c, np.broadcast_to(tc, (h, w)), t_best)
    label = np.where(take_c, 0, label)

    # wall rectangles, one edge at a time to bound memory
    edge_hit = np.full((h, w), -1, dtype=np.int64)
    s_hit = np.zeros((h, w))
    z_hit = np.zeros((h, w))
    dx = sin_t[None, :]
    dy = cos_t[None, :]
    for j in range(edges.shape[0]):
        ax, ay = edges[j, 0], edges[j, 1]
        ex = edges[j, 2] - ax
        ey = edges[j, 3] - ay
        denom = dx * ey - dy * ex
        rx = ax - ox
        ry = ay - oy
        with np.errstate(divide="ignore", invalid="ignore"):
            tp = (rx * ey - ry * ex) / denom
            s = (rx * dy - ry * dx) / denom
        ok2d = (denom != 0.0) & (tp > _EPS_T) & (s >= 0.0) & (s <= 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t3 = tp / ca
        z = t3 * sa
        take = ok2d & (ca > 0.0) & (z >= z_floor) & (z <= z_ceil) & (t3 < t_best)
        t_best = np.where(take, t3, t_best)
        label = np.where(take, 1, label)
        edge_hit = np.where(take, j, edge_hit)
        s_hit = np.where(take, np.broadcast_to(s, (h, w)), s_hit)
        z_hit = np.where(take, z, z_hit)
    return t_best, label, edge_hit, s_hit, z_hit


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

if use_numba():
    import numba

    _plan_hits_jit = numba.njit(cache=True)(_plan_hits_loop)
    _raycast_jit = numba.njit(cache=True)(_raycast_loop)

    def plan_hits(sin_t, cos_t, ox, oy, edges):
        """Nearest positive ray/polygon-edge intersection per azimuth.

        Returns (plan distance, edge index, offset fraction along edge);
        ties keep the smallest edge index.
        """
        n = sin_t.shape[0]
        cs = np.empty(n)
        edge = np.empty(n, dtype=np.int64)
        off = np.empty(n)
        _plan_hits_jit(sin_t, cos_t, float(ox), float(oy),
                       np.ascontiguousarray(edges, dtype=np.float64),
                       cs, edge, off)
        return cs, edge, off

    def raycast(sin_t, cos_t, sin_a, cos_a, ox, oy, z_floor, z_ceil, edges):
        """Exact nearest-hit raycast against floor/ceiling planes and wall
        rectangles.  Returns (slant depth, label, edge index, edge offset,
        hit z) with labels 0=ceiling, 1=wall, 2=floor.
        """
        w = sin_t.shape[0]
        h = sin_a.shape[0]
        depth = np.empty((h, w))
        label = np.empty((h, w), dtype=np.int64)
        edge = np.empty((h, w), dtype=np.int64)
        s = np.empty((h, w))
        z = np.empty((h, w))
        _raycast_jit(sin_t, cos_t, sin_a, cos_a, float(ox), float(oy),
                     float(z_floor), float(z_ceil),
                     np.ascontiguousarray(edges, dtype=np.float64),
                     depth, label, edge, s, z)
        return depth, label, edge, s, z

    BACKEND = "numba"
else:
    def plan_hits(sin_t, cos_t, ox, oy, edges):
        return _plan_hits_numpy(sin_t, cos_t, float(ox), float(oy),
                                np.asarray(edges, dtype=np.float64))

    def raycast(sin_t, cos_t, sin_a, cos_a, ox, oy, z_floor, z_ceil, edges):
        return _raycast_numpy(sin_t, cos_t, sin_a, cos_a, float(ox), float(oy),
                              float(z_floor), float(z_ceil),
                              np.asarray(edges, dtype=np.float64))

    BACKEND = "numpy"
