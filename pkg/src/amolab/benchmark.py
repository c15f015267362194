"""Timing comparison of the compiled and pure-Python kernel backends.

Times the hot entry points on representative workloads and prints one table
row per (kernel, backend).  Wall-clock numbers go to stdout only, never into
run artifacts, so artifact determinism is unaffected.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import kernels

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _time(fn, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads(sizes=None):
    n_long, n_lyap, n_grid, n_rot = sizes or (10**6, 10**4, 200, 30000)
    thetas = (np.arange(32) + 0.31) / 32
    e_grid = np.linspace(-3.0, 3.0, 128)
    th_flat = np.repeat((np.arange(16) + 0.5) / 16, 16)
    e_flat = np.tile(np.linspace(-5.5, 5.5, 16), 16)
    return [
        ("long product (%.0e steps)" % n_long,
         lambda k: k.qr_product(0.3, 2.0, GOLDEN, 0.2, n_long)),
        ("lyapunov sweep (32 x %.0e)" % n_lyap,
         lambda k: k.lyap_grid(1.0, 2.0, GOLDEN, thetas, n_lyap)),
        ("window-mass grid (256 pts, N=%d)" % n_grid,
         lambda k: k.gram_pairs(e_flat, th_flat, 2.0, GOLDEN, n_grid)),
        ("rotation orbit (128 x %.0e)" % n_rot,
         lambda k: k.rotation_grid(e_grid, 0.5, GOLDEN, 0.0, n_rot)),
        ("telescoping sweep (64 x 55 x 2)",
         lambda k: k.telescope_pairs(0.5, 1.2, GOLDEN, 55,
                                     (np.arange(64) + 0.17) / 64, 1e-6)),
    ]


def run_benchmark(sizes=None):
    """Returns the table lines (also printed by the CLI bench command)."""
    if isinstance(sizes, str):
        sizes = tuple(int(float(x)) for x in sizes.split(","))
    backends = kernels.backends()
    lines = [f"kernel backends: {', '.join(backends)} (active: {kernels.backend_name()})",
             f"{'workload':40s} " + " ".join(f"{name:>12s}" for name in backends)
             + ("      speedup" if len(backends) > 1 else "")]
    for label, call in _workloads(sizes):
        times = {name: _time(lambda m=mod: call(m)) for name, mod in backends.items()}
        row = f"{label:40s} " + " ".join(f"{times[name] * 1e3:10.2f}ms" for name in backends)
        if "compiled" in times and "python" in times:
            row += f"  {times['python'] / times['compiled']:10.1f}x"
        lines.append(row)
    return lines
