#!/usr/bin/env python3
"""Benchmark the numeric kernels: numba backend vs pure-numpy fallback.

Both implementations are loaded side by side (the env flag EMOVAD_NUMBA only
picks which one the package binds at import), so one process can time both.

Usage: python benchmarks/bench_kernels.py [--iters N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from emovad import _kernels


def make_cases(rng):
    n_feat = 73
    n_labels = 8
    n_examples = 1000
    verifier_f = 2 * n_feat + 3
    return {
        "sigmoid (n=4096)": (
            "sigmoid",
            (rng.standard_normal(4096),),
            2000,
        ),
        "pairwise_sum (n=100k)": (
            "pairwise_sum",
            (rng.random(100_000),),
            200,
        ),
        "bce_mean (K=28)": (
            "bce_mean",
            ((rng.random(28) < 0.3).astype(np.float64), rng.random(28)),
            5000,
        ),
        "toy_forward (K=8, F=73)": (
            "toy_forward",
            (
                rng.standard_normal((n_labels, n_feat)),
                rng.standard_normal(n_labels),
                rng.standard_normal((3, n_feat)),
                rng.standard_normal(3),
                rng.random(n_feat),
            ),
            5000,
        ),
        "adamw_update (P=50k)": (
            "adamw_update",
            (
                rng.standard_normal(50_000),
                rng.standard_normal(50_000),
                np.zeros(50_000),
                np.zeros(50_000),
                3,
                1e-3,
                0.9,
                0.95,
                1e-8,
                0.1,
            ),
            200,
        ),
        "logreg_epoch (N=1000, F=149, M=4)": (
            "logreg_epoch",
            (
                rng.random((n_examples, verifier_f)),
                (rng.random((n_examples, 4)) < 0.5).astype(np.float64),
                rng.standard_normal((4, verifier_f)) * 0.1,
                np.zeros(4),
            ),
            20,
        ),
    }


def time_impl(fn, args, iters):
    fn(*args)  # warmup (JIT compile on the numba side)
    start = time.perf_counter()
    for _ in range(iters):
        fn(*args)
    return (time.perf_counter() - start) / iters


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--iters_scale", type=float, default=1.0)
    args = parser.parse_args()

    impls = _kernels.implementations()
    if "numba" not in impls:
        print("numba backend unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    cases = make_cases(rng)

    print(f"active package backend: {_kernels.BACKEND}")
    print(f"{'kernel':<36} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    print("-" * 73)
    speedups = []
    for label, (name, call_args, iters) in cases.items():
        iters = max(1, int(iters * args.iters_scale))
        per = {}
        for backend in ("numpy", "numba"):
            # adamw mutates its inputs: give each backend fresh copies
            fresh = tuple(
                a.copy() if isinstance(a, np.ndarray) else a for a in call_args
            )
            per[backend] = time_impl(impls[backend][name], fresh, iters)
        speedup = per["numpy"] / per["numba"]
        speedups.append(speedup)
        print(
            f"{label:<36} {per['numpy']*1e6:>9.1f} us {per['numba']*1e6:>9.1f} us "
            f"{speedup:>8.2f}x"
        )
    print("-" * 73)
    print(f"geometric-mean speedup: {float(np.exp(np.mean(np.log(speedups)))):.2f}x")


if __name__ == "__main__":
    main()
