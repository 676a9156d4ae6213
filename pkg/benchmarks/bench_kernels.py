#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Runs the two hot kernels on workloads shaped like a real rotation sweep
(76800-sample RIR magnitude scans; 12 echoes per mic combination search) and
prints per-call timings and speedups, then times one full observation
pipeline under both backends.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import importlib
import os
import statistics
import sys
import time

import numpy as np


def time_call(fn, *args, repeats: int, warmup: int = 2) -> float:
    for _ in range(warmup):
        fn(*args)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def peak_workload(rng):
    n = 76800
    mag = np.abs(rng.normal(0, 3e-4, size=n))
    idx = rng.integers(1, 12000, size=50)
    mag[idx] += rng.uniform(0.05, 2.5, size=50)
    return mag, float(mag.max() * 0.02), 8, 40


def search_workload(rng):
    ext = 0.5
    mic = np.array([[ext, 0.0], [0.0, ext], [-ext, 0.0], [0.0, -ext]])
    dists = [np.sort(rng.uniform(0.5, 14.0, size=12)) for _ in range(4)]
    return mic, dists, 0.05, 1e-9, 0.0, 0.0, 1e-6


def bench_kernels(repeats: int) -> None:
    from echoroom import _kernels_py

    try:
        from echoroom import _kernels
    except ImportError:
        print("compiled extension not built; run `python setup.py build_ext --inplace`")
        sys.exit(1)

    rng = np.random.default_rng(0)
    rows = []

    args = peak_workload(rng)
    t_c = time_call(_kernels.pick_peaks, *args, repeats=repeats)
    t_p = time_call(_kernels_py.pick_peaks, *args, repeats=repeats)
    rows.append(("pick_peaks (76800 samples)", t_c, t_p))

    args = search_workload(rng)
    t_c = time_call(_kernels.common_is_search, *args, repeats=repeats)
    t_p = time_call(_kernels_py.common_is_search, *args, repeats=repeats)
    rows.append(("common_is_search (12^4 combos)", t_c, t_p))

    print(f"{'kernel':<34} {'cython':>10} {'numpy':>10} {'speedup':>8}")
    for name, t_c, t_p in rows:
        print(f"{name:<34} {t_c * 1e3:>8.3f}ms {t_p * 1e3:>8.3f}ms {t_p / t_c:>7.1f}x")


def bench_pipeline(repeats: int) -> None:
    """One full 36-orientation observation sweep under each backend."""

    def run_sweep() -> float:
        from echoroom.geometry import Point2
        from echoroom.harness import ExperimentConfig, RoomSimulation
        from echoroom.acoustics import Room
        from echoroom.rig import RigPose, sweep_with_stats

        cfg = ExperimentConfig(snr_db=30.0)
        room = Room.rectangular(6.0, 5.0)
        sim = RoomSimulation(
            room, Point2(0, 0), cfg.sim_config(), cfg.peak_config(), noise_root=1
        )
        pose = RigPose(Point2(3.0, 2.0), 0.0, 0.5)
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            sweep_with_stats(sim.observe, pose, 10.0, cfg.islocate_config())
            best = min(best, time.perf_counter() - t0)
        return best

    import echoroom

    print(f"\nfull 36-orientation sweep, backend={echoroom.BACKEND}: ", end="")
    print(f"{run_sweep() * 1e3:.0f} ms")
    print("(set ECHOROOM_FORCE_PYTHON=1 and rerun to time the fallback pipeline)")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    bench_kernels(args.repeats)
    bench_pipeline(max(3, args.repeats // 4))
