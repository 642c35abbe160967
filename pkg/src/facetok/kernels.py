"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set FACETOK_DISABLE_NUMBA=1 to force the numpy implementations (useful on
platforms where numba is unavailable and for benchmarking the JIT payoff,
see benchmarks/bench_kernels.py). Both paths produce identical results.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("FACETOK_DISABLE_NUMBA", "0") != "1"

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def _nearest_codes_np(latents, codebook):
    # ||z - e||^2 = ||z||^2 - 2 z.e + ||e||^2 ; argmin ties go to lowest index
    d = (
        np.sum(latents * latents, axis=1, keepdims=True)
        - 2.0 * latents @ codebook.T
        + np.sum(codebook * codebook, axis=1)[None, :]
    )
    return np.argmin(d, axis=1).astype(np.int64)


def _ema_accumulate_np(tokens, latents, n_codes):
    counts = np.bincount(tokens, minlength=n_codes).astype(np.float64)
    sums = np.zeros((n_codes, latents.shape[1]), dtype=np.float64)
    np.add.at(sums, tokens, latents.astype(np.float64))
    return counts, sums


if USE_NUMBA:

    @numba.njit(cache=True)
    def _nearest_codes_nb(latents, codebook):
        # ||z - e||^2 = ||z||^2 - 2 z.e + ||e||^2 ; the ||z||^2 term is
        # constant per row, so the argmin only needs ||e||^2 - 2 z.e.
        # np.dot dispatches to BLAS inside the JIT; the fused argmin loop
        # avoids materialising the full distance matrix numpy would build.
        n = latents.shape[0]
        k, d = codebook.shape
        e_norm = np.empty(k)
        for j in range(k):
            acc = 0.0
            for c in range(d):
                acc += codebook[j, c] * codebook[j, c]
            e_norm[j] = acc
        gram = np.dot(latents, codebook.T)
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            best = 0
            best_d = np.inf
            for j in range(k):
                score = e_norm[j] - 2.0 * gram[i, j]
                if score < best_d:
                    best_d = score
                    best = j
            out[i] = best
        return out

    @numba.njit(cache=True)
    def _ema_accumulate_nb(tokens, latents, n_codes):
        n, d = latents.shape
        counts = np.zeros(n_codes, dtype=np.float64)
        sums = np.zeros((n_codes, d), dtype=np.float64)
        for i in range(n):
            t = tokens[i]
            counts[t] += 1.0
            for c in range(d):
                sums[t, c] += latents[i, c]
        return counts, sums


def nearest_codes(latents, codebook):
    """Index of the nearest codebook row (squared L2) for each latent row.

    Ties break toward the lowest index in both implementations.
    """
    latents = np.ascontiguousarray(latents, dtype=np.float64)
    codebook = np.ascontiguousarray(codebook, dtype=np.float64)
    if USE_NUMBA:
        return _nearest_codes_nb(latents, codebook)
    return _nearest_codes_np(latents, codebook)


def ema_accumulate(tokens, latents, n_codes):
    """Per-code assignment counts and latent sums for the EMA codebook update."""
    tokens = np.ascontiguousarray(tokens, dtype=np.int64)
    latents = np.ascontiguousarray(latents, dtype=np.float64)
    if USE_NUMBA:
        return _ema_accumulate_nb(tokens, latents, n_codes)
    return _ema_accumulate_np(tokens, latents, n_codes)
