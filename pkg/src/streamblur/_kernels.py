"""Hot numeric kernels: numba-jitted implementations with pure-numpy fallbacks.

The active path is chosen at import time.  Set ``STREAMBLUR_NUMBA=0`` to force
the numpy fallback (the ``bench`` subcommand uses this to compare both paths).
Both paths implement identical barrier semantics: a sweep is one full damped
responsibility update from the previous availabilities, then one full damped
availability update from the fresh responsibilities.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    HAVE_NUMBA = False


def _numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("STREAMBLUR_NUMBA", "1") != "0"


# ---------------------------------------------------------------------------
# Affinity-propagation message sweep
# ---------------------------------------------------------------------------

def ap_sweep_numpy(S, R, A, lam):
    """One damped message-passing sweep, in place.  Requires n >= 2."""
    n = S.shape[0]
    rows = np.arange(n)
    AS = A + S
    j1 = np.argmax(AS, axis=1)  # first max wins: lowest-index tie rule
    m1 = AS[rows, j1]
    AS[rows, j1] = -np.inf
    m2 = np.max(AS, axis=1)
    R_new = S - m1[:, None]
    R_new[rows, j1] = S[rows, j1] - m2
    R *= lam
    R += (1.0 - lam) * R_new

    Rp = np.maximum(R, 0.0)
    np.fill_diagonal(Rp, 0.0)
    colsum = Rp.sum(axis=0)  # sum_{i'!=j} max(0, r(i',j))
    A_new = np.minimum(0.0, np.diag(R)[None, :] + colsum[None, :] - Rp)
    np.fill_diagonal(A_new, colsum)
    A *= lam
    A += (1.0 - lam) * A_new


if HAVE_NUMBA:

    @njit(cache=True)
    def ap_sweep_numba(S, R, A, lam):
        n = S.shape[0]
        for i in range(n):
            m1 = -np.inf
            m2 = -np.inf
            jmax = -1
            for j in range(n):
                v = A[i, j] + S[i, j]
                if v > m1:
                    m2 = m1
                    m1 = v
                    jmax = j
                elif v > m2:
                    m2 = v
            for j in range(n):
                best = m2 if j == jmax else m1
                R[i, j] = lam * R[i, j] + (1.0 - lam) * (S[i, j] - best)
        for j in range(n):
            tot = 0.0
            for i in range(n):
                if i != j and R[i, j] > 0.0:
                    tot += R[i, j]
            for i in range(n):
                if i == j:
                    a_new = tot
                else:
                    v = R[j, j] + tot
                    if R[i, j] > 0.0:
                        v -= R[i, j]
                    a_new = v if v < 0.0 else 0.0
                A[i, j] = lam * A[i, j] + (1.0 - lam) * a_new


# ---------------------------------------------------------------------------
# Separable Gaussian blur of an image region (edge-clamped inside the region)
# ---------------------------------------------------------------------------

def separable_blur_numpy(region, kernel):
    """Blur a (H, W, C) float region with a 1-D kernel, two passes."""
    h, w, _ = region.shape
    r = (len(kernel) - 1) // 2
    tmp = np.zeros_like(region)
    cols = np.arange(w)
    for u in range(-r, r + 1):
        idx = np.clip(cols + u, 0, w - 1)
        tmp += kernel[u + r] * region[:, idx, :]
    out = np.zeros_like(region)
    rows = np.arange(h)
    for u in range(-r, r + 1):
        idx = np.clip(rows + u, 0, h - 1)
        out += kernel[u + r] * tmp[idx, :, :]
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def separable_blur_numba(region, kernel):
        h, w, c = region.shape
        r = (len(kernel) - 1) // 2
        tmp = np.zeros_like(region)
        for u in range(-r, r + 1):
            ku = kernel[u + r]
            for y in range(h):
                for x in range(w):
                    xs = x + u
                    if xs < 0:
                        xs = 0
                    elif xs > w - 1:
                        xs = w - 1
                    for ch in range(c):
                        tmp[y, x, ch] += ku * region[y, xs, ch]
        out = np.zeros_like(region)
        for u in range(-r, r + 1):
            ku = kernel[u + r]
            for y in range(h):
                ys = y + u
                if ys < 0:
                    ys = 0
                elif ys > h - 1:
                    ys = h - 1
                for x in range(w):
                    for ch in range(c):
                        out[y, x, ch] += ku * tmp[ys, x, ch]
        return out


USE_NUMBA = _numba_enabled()

if USE_NUMBA:
    ap_sweep = ap_sweep_numba
    separable_blur = separable_blur_numba
else:
    ap_sweep = ap_sweep_numpy
    separable_blur = separable_blur_numpy


def active_path() -> str:
    return "numba" if USE_NUMBA else "numpy"


def warmup():
    """Trigger JIT compilation (no-op on the numpy path)."""
    S = np.array([[-1.0, -2.0], [-2.0, -1.0]])
    ap_sweep(S, np.zeros((2, 2)), np.zeros((2, 2)), 0.5)
    separable_blur(np.zeros((3, 3, 1)), np.array([0.25, 0.5, 0.25]))
