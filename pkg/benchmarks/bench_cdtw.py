#!/usr/bin/env python3
"""Benchmark the compiled banded-DTW kernel against the numpy fallback.

Usage: python benchmarks/bench_cdtw.py [--n 40] [--m 256] [--window 0.1]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tsactive import WarpingWindow
from tsactive._kernels import (HAVE_COMPILED, band_dtw, fallback_band_dtw,
                               fallback_band_dtw_block)
from tsactive._kernels import band_dtw_block


def time_matrix(block_fn, data: np.ndarray, radius: int, repeats: int = 3) -> float:
    n = data.shape[0]
    best = np.inf
    for _ in range(repeats):
        out = np.zeros((n, n))
        start = time.perf_counter()
        block_fn(data, radius, out, 0, n)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=40)
    parser.add_argument("--m", type=int, default=256)
    parser.add_argument("--window", default="0.1")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    data = rng.standard_normal((args.n, args.m))
    radius = WarpingWindow.parse(args.window).radius(args.m)
    pairs = args.n * (args.n - 1) // 2

    print(f"{args.n} series, length {args.m}, band radius {radius}, {pairs} pairs")
    if not HAVE_COMPILED:
        print("compiled kernel NOT available; measuring fallback only")
    else:
        x, y = data[0], data[1]
        assert abs(band_dtw(x, y, radius) - fallback_band_dtw(x, y, radius)) < 1e-12
        t_c = time_matrix(band_dtw_block, data, radius)
        print(f"compiled : {t_c * 1e3:9.1f} ms   ({pairs / t_c:9.0f} pairs/s)")
    t_py = time_matrix(fallback_band_dtw_block, data, radius)
    print(f"fallback : {t_py * 1e3:9.1f} ms   ({pairs / t_py:9.0f} pairs/s)")
    if HAVE_COMPILED:
        print(f"speedup  : {t_py / t_c:9.1f}x")


if __name__ == "__main__":
    main()
