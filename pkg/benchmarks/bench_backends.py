"""Kernel benchmark: numba backend vs the pure-numpy fallback.

Imports both kernel modules directly, so the PREFEC_BACKEND switch is
irrelevant here. The first numba call per kernel compiles; a warm-up
call keeps that out of the timings.

Usage: python3 benchmarks/bench_backends.py [--rows N] [--runs K]
"""

import argparse
import math
import time

import numpy as np

from prefec import build_square_qam
from prefec._backend import CHUNK_ROWS
from prefec import _kernels_numpy as k_np

try:
    from prefec import _kernels_numba as k_nb
except ImportError:
    k_nb = None


def make_workload(rows, order=32, sigma_z2=0.3, sigma_theta2=0.01, seed=0):
    c = build_square_qam(64)
    rng = np.random.default_rng(seed)
    tx0 = rng.integers(0, c.M, size=rows)
    rx = c.points[tx0] + rng.normal(scale=math.sqrt(sigma_z2), size=(rows, 2))
    bits = c.labels.astype(np.uint8)
    logp = np.log(c.probs)

    x, w = np.polynomial.hermite.hermgauss(order)
    theta = math.sqrt(2.0 * sigma_theta2) * x
    logw = np.log(w) - 0.5 * math.log(math.pi)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    rot = np.empty((c.M, order, 2))
    rot[:, :, 0] = c.points[:, 0, None] * cos_t - c.points[:, 1, None] * sin_t
    rot[:, :, 1] = c.points[:, 0, None] * sin_t + c.points[:, 1, None] * cos_t

    inv2s2 = 0.5 / sigma_z2
    w_table = k_np.logq_gaussian(rx, c.points, inv2s2)
    return {
        "rx": rx,
        "points": c.points,
        "inv2s2": inv2s2,
        "rot": np.ascontiguousarray(rot),
        "logw": logw,
        "w": w_table,
        "tx0": tx0,
        "bits": bits,
        "logp": logp,
    }


def bench(fn, args, n_runs):
    fn(*args)  # warm-up (numba: JIT compile)
    times = []
    for _ in range(n_runs):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    t = np.array(times)
    return t.mean(), t.std()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=CHUNK_ROWS,
                    help="panel height (default: one internal chunk)")
    ap.add_argument("--runs", type=int, default=7)
    args = ap.parse_args()

    wl = make_workload(args.rows)
    cases = [
        ("logq_gaussian", (wl["rx"], wl["points"], wl["inv2s2"])),
        ("logq_pn", (wl["rx"], wl["rot"], wl["logw"], wl["inv2s2"])),
        ("hard_decisions", (wl["rx"], wl["points"])),
        ("lvalue_reduce", (wl["w"], wl["logp"], wl["bits"], 50.0)),
        ("air_reduce", (wl["w"], wl["tx0"], wl["bits"])),
    ]

    print(f"rows={args.rows}, M=64, runs={args.runs} (after warm-up)")
    print(f"{'kernel':<16}{'numpy [ms]':>18}{'numba [ms]':>18}{'speedup':>10}")
    for name, call_args in cases:
        m_np, s_np = bench(getattr(k_np, name), call_args, args.runs)
        if k_nb is None:
            print(f"{name:<16}{m_np * 1e3:>12.2f} ± {s_np * 1e3:<4.2f}{'n/a':>18}{'n/a':>10}")
            continue
        m_nb, s_nb = bench(getattr(k_nb, name), call_args, args.runs)
        print(
            f"{name:<16}{m_np * 1e3:>12.2f} ± {s_np * 1e3:<4.2f}"
            f"{m_nb * 1e3:>12.2f} ± {s_nb * 1e3:<4.2f}{m_np / m_nb:>9.1f}x"
        )
    if k_nb is None:
        print("numba not importable; only the fallback was timed")


if __name__ == "__main__":
    main()
