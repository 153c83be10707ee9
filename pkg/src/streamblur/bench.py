"""Timing harness for the hot kernels on both execution paths.

Sweep cost is dense and value-independent, so matrices are synthetic; sizes
default to realistic retained-state shapes (a 90-frame window of up to ten
tracked faces plus exemplars).
"""

from __future__ import annotations

import time
from typing import Optional, Sequence

import numpy as np

from . import _kernels

DEFAULT_SIZES = (256, 512, 910)
DEFAULT_REPEATS = 30
BLUR_SHAPE = (128, 128, 3)
BLUR_SIGMA = 8.0


def _sweep_paths():
    paths = [("numpy", _kernels.ap_sweep_numpy)]
    if _kernels.HAVE_NUMBA:
        paths.insert(0, ("numba", _kernels.ap_sweep_numba))
    return paths


def _blur_paths():
    paths = [("numpy", _kernels.separable_blur_numpy)]
    if _kernels.HAVE_NUMBA:
        paths.insert(0, ("numba", _kernels.separable_blur_numba))
    return paths


def _summary(seconds: Sequence[float]) -> dict:
    ms = np.asarray(seconds) * 1000.0
    return {"p50_ms": float(np.percentile(ms, 50)),
            "p95_ms": float(np.percentile(ms, 95)),
            "mean_ms": float(ms.mean())}


def _synthetic_similarity(rng, n: int) -> np.ndarray:
    S = -rng.uniform(0.0, 0.4, size=(n, n))
    np.fill_diagonal(S, 0.0)
    off = S[~np.eye(n, dtype=bool)]
    np.fill_diagonal(S, np.median(off))
    return S


def bench_sweep(sizes: Sequence[int] = DEFAULT_SIZES,
                repeats: int = DEFAULT_REPEATS, seed: int = 0,
                damping: float = 0.5) -> list:
    """Per-size p50/p95 of a single message sweep on each path."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        S = _synthetic_similarity(rng, n)
        row = {"n": int(n)}
        for name, fn in _sweep_paths():
            R = np.zeros((n, n))
            A = np.zeros((n, n))
            fn(S, R, A, damping)  # warm: jit compile, caches
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn(S, R, A, damping)
                times.append(time.perf_counter() - t0)
            row[name] = _summary(times)
        if "numba" in row and "numpy" in row:
            row["speedup_p50"] = row["numpy"]["p50_ms"] / row["numba"]["p50_ms"]
        rows.append(row)
    return rows


def bench_blur(repeats: int = DEFAULT_REPEATS, seed: int = 0,
               shape=BLUR_SHAPE, sigma: float = BLUR_SIGMA) -> dict:
    from .blur import gaussian_kernel
    rng = np.random.default_rng(seed)
    region = rng.uniform(0.0, 255.0, size=shape)
    kernel = gaussian_kernel(sigma)
    out = {"shape": list(shape), "sigma": sigma}
    for name, fn in _blur_paths():
        fn(region, kernel)  # warm
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn(region, kernel)
            times.append(time.perf_counter() - t0)
        out[name] = _summary(times)
    if "numba" in out and "numpy" in out:
        out["speedup_p50"] = out["numpy"]["p50_ms"] / out["numba"]["p50_ms"]
    return out


def run_bench(sizes: Sequence[int] = DEFAULT_SIZES,
              repeats: int = DEFAULT_REPEATS, seed: int = 0) -> dict:
    return {"seed": seed, "repeats": repeats,
            "active_path": _kernels.active_path(),
            "sweep": bench_sweep(sizes, repeats, seed),
            "blur": bench_blur(repeats, seed)}


def format_report(report: dict) -> str:
    lines = [f"active path: {report['active_path']}"
             f" (repeats={report['repeats']})"]
    lines.append("message sweep:")
    for row in report["sweep"]:
        parts = [f"  n={row['n']:>5}"]
        for name in ("numba", "numpy"):
            if name in row:
                s = row[name]
                parts.append(f"{name} p50={s['p50_ms']:7.3f}ms "
                             f"p95={s['p95_ms']:7.3f}ms")
        if "speedup_p50" in row:
            parts.append(f"x{row['speedup_p50']:.1f}")
        lines.append("  ".join(parts))
    b = report["blur"]
    lines.append(f"separable blur {b['shape'][0]}x{b['shape'][1]} "
                 f"sigma={b['sigma']}:")
    parts = ["       "]
    for name in ("numba", "numpy"):
        if name in b:
            s = b[name]
            parts.append(f"{name} p50={s['p50_ms']:7.3f}ms "
                         f"p95={s['p95_ms']:7.3f}ms")
    if "speedup_p50" in b:
        parts.append(f"x{b['speedup_p50']:.1f}")
    lines.append("  ".join(parts))
    return "\n".join(lines)
