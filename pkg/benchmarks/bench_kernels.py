"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each quantizer kernel on realistic shapes (batches of per-frame latents
against a 512-entry codebook) in both the in-process configuration and a
subprocess with FACETOK_DISABLE_NUMBA=1, then prints a timing table.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

CASES = [
    # (n_latents, latent_dim, codebook_size)
    (1_600, 64, 512),     # one training batch: 16 clips x 100 frames
    (16_000, 64, 512),    # ten batches
    (144_000, 64, 512),   # a full 2880-clip corpus pass at ~50 frames/clip
]


def bench_current_process(repeats):
    """Time nearest_codes and ema_accumulate with whatever path is active."""
    from facetok import kernels

    rng = np.random.default_rng(0)
    rows = []
    for n, d, k in CASES:
        latents = rng.standard_normal((n, d))
        codebook = rng.standard_normal((k, d))
        tokens = kernels.nearest_codes(latents, codebook)  # also warms the JIT

        t0 = time.perf_counter()
        for _ in range(repeats):
            kernels.nearest_codes(latents, codebook)
        t_nearest = (time.perf_counter() - t0) / repeats

        kernels.ema_accumulate(tokens, latents, k)
        t0 = time.perf_counter()
        for _ in range(repeats):
            kernels.ema_accumulate(tokens, latents, k)
        t_ema = (time.perf_counter() - t0) / repeats

        rows.append({
            "case": f"{n}x{d} vs {k}",
            "nearest_codes_ms": t_nearest * 1e3,
            "ema_accumulate_ms": t_ema * 1e3,
        })
    return {"numba": kernels.USE_NUMBA, "rows": rows}


def bench_subprocess(disable_numba, repeats):
    env = dict(os.environ, FACETOK_DISABLE_NUMBA="1" if disable_numba else "0")
    code = (
        "import json, sys; sys.path.insert(0, %r); "
        "from bench_kernels import bench_current_process; "
        "print(json.dumps(bench_current_process(%d)))"
        % (os.path.dirname(os.path.abspath(__file__)), repeats)
    )
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print("Benchmarking quantizer kernels (lower is better)...")
    numpy_res = bench_subprocess(disable_numba=True, repeats=args.repeats)
    numba_res = bench_subprocess(disable_numba=False, repeats=args.repeats)
    assert not numpy_res["numba"]
    if not numba_res["numba"]:
        print("note: numba unavailable; both columns use the numpy fallback")

    header = f"{'case':>18} | {'kernel':>14} | {'numpy ms':>9} | {'numba ms':>9} | {'speedup':>7}"
    print(header)
    print("-" * len(header))
    for np_row, nb_row in zip(numpy_res["rows"], numba_res["rows"]):
        for key, label in (("nearest_codes_ms", "nearest_codes"),
                           ("ema_accumulate_ms", "ema_accumulate")):
            a, b = np_row[key], nb_row[key]
            print(f"{np_row['case']:>18} | {label:>14} | {a:9.3f} | {b:9.3f} | {a / b:6.2f}x")


if __name__ == "__main__":
    main()
