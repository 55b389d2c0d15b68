"""Kernel benchmark: numba against the pure-numpy fallback.

The backend is chosen at import time from ROOMSYNTH_NUMBA, so each side is
timed in a subprocess with the flag set accordingly.  Run directly:

    python3 -m roomsynth.bench --grid 512x256 --rooms 8 --repeats 3
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def make_rooms(n_rooms: int, seed: int = 20240817):
    from .shapes import RoomShape, default_camera
    rng = np.random.default_rng(seed)
    rooms = []
    for _ in range(n_rooms):
        w = rng.uniform(3.0, 8.0)
        d = rng.uniform(3.0, 8.0)
        h = rng.uniform(2.4, 3.2)
        shape = RoomShape(floor_corners=((0, 0), (w, 0), (w, d), (0, d)),
                          ceiling_height=h)
        rooms.append((shape, default_camera(shape)))
    return rooms


def measure(width: int, height: int, n_rooms: int, repeats: int) -> dict:
    """Seconds per depth map with the backend active in this process."""
    from .kernels import BACKEND
    from .panorama import gen_depth
    from .projection import PanoramaGrid
    grid = PanoramaGrid(width, height)
    rooms = make_rooms(n_rooms)
    for shape, cam in rooms[:2]:        # warm up (jit compilation)
        gen_depth(shape, cam, grid)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for shape, cam in rooms:
            gen_depth(shape, cam, grid)
        best = min(best, (time.perf_counter() - start) / n_rooms)
    return {"backend": BACKEND, "grid": f"{width}x{height}",
            "seconds_per_map": best}


def run_benchmark(width: int = 512, height: int = 256, n_rooms: int = 8,
                  repeats: int = 3) -> list[dict]:
    """Time both backends in subprocesses; returns one record each."""
    results = []
    for flag in ("1", "0"):
        env = dict(os.environ, ROOMSYNTH_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, "-m", "roomsynth.bench", "--worker",
             "--grid", f"{width}x{height}", "--rooms", str(n_rooms),
             "--repeats", str(repeats)],
            env=env, capture_output=True, text=True, check=True)
        results.append(json.loads(out.stdout))
    return results


def format_results(results: list[dict]) -> str:
    lines = ["backend   grid       s/map"]
    for r in results:
        lines.append(f"{r['backend']:<9} {r['grid']:<10} "
                     f"{r['seconds_per_map']:.4f}")
    by_name = {r["backend"]: r["seconds_per_map"] for r in results}
    if {"numba", "numpy"} <= set(by_name):
        lines.append(f"speedup: {by_name['numpy'] / by_name['numba']:.2f}x")
    return "\n".join(lines)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", default="512x256")
    parser.add_argument("--rooms", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--worker", action="store_true",
                        help="time only the current backend, print JSON")
    args = parser.parse_args(argv)
    width, height = (int(v) for v in args.grid.split("x"))
    if args.worker:
        print(json.dumps(measure(width, height, args.rooms, args.repeats)))
        return
    print(format_results(run_benchmark(width, height, args.rooms,
                                       args.repeats)))


if __name__ == "__main__":
    main()
