"""Position-weighted incremental affinity propagation over face detections.

Pairwise similarity couples embedding dissimilarity with a motion penalty
derived from box-center displacement, so detections of one face in nearby
frames stay close while spatially distant look-alikes are kept apart.  Batch
message passing runs inside the first segment; later segments extend the
responsibility/availability state by copying each new point's messages from
its most similar predecessor and resume passing until assignments stabilize,
which lets new clusters emerge without a preset cluster count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ._kernels import ap_sweep
from .core import Detection, StreamHeader

REFERENCE_FPS = 30.0


class DegenerateEmbeddingError(ValueError):
    """An embedding has zero norm; cosine similarity is undefined."""


class StateError(ValueError):
    """Cluster-state matrices disagree with the expected dimensions."""


@dataclass
class ClusterConfig:
    damping: float = 0.5
    preference: float | str = "median"
    max_iters: int = 200
    stable_window: int = 10
    literal_similarity: bool = False
    check_finite: bool = False
    # flat same-identity blocks can drive synchronized message oscillation at
    # low damping; a failed run is retried once from zeros at this value
    rescue_damping: float | None = 0.9

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"damping must be in [0,1), got {self.damping}")
        if self.rescue_damping is not None \
                and not 0.0 <= self.rescue_damping < 1.0:
            raise ValueError("rescue_damping must be in [0,1) or None")


@dataclass
class ClusterState:
    """Message-passing state over the currently retained detections."""

    S: np.ndarray
    R: np.ndarray
    A: np.ndarray
    assignments: np.ndarray  # exemplar index per detection, self-consistent
    detections: list[Detection]
    damping: float = 0.5
    converged: bool = True
    iterations: int = 0

    @property
    def n(self) -> int:
        return len(self.detections)

    def exemplars(self) -> np.ndarray:
        return np.unique(self.assignments)


# ---------------------------------------------------------------------------
# Similarity
# ---------------------------------------------------------------------------

def _shrinkage(center_i, center_j, hdr: StreamHeader) -> float:
    dx = center_i[0] - center_j[0]
    dy = center_i[1] - center_j[1]
    rel = (dx * dx + dy * dy) / (hdr.diagonal ** 2)
    return hdr.quality_scale * (REFERENCE_FPS / hdr.fps) * rel


def positioned_similarity(di: Detection, dj: Detection, hdr: StreamHeader,
                          literal: bool = False) -> float:
    """Similarity s(i,j) <= 0 combining motion penalty and embedding cosine.

    Default form is -shrk * (1 - cos): zero for co-located detections and
    increasingly negative with spatial distance and embedding dissimilarity.
    ``literal=True`` selects -shrk * cos instead, which rewards anti-aligned
    embeddings; it is kept for fidelity experiments only.
    """
    ni = float(np.dot(di.embedding, di.embedding)) ** 0.5
    nj = float(np.dot(dj.embedding, dj.embedding)) ** 0.5
    if ni == 0.0 or nj == 0.0:
        raise DegenerateEmbeddingError("zero-norm embedding")
    cos = float(np.dot(di.embedding, dj.embedding)) / (ni * nj)
    cos = min(1.0, max(-1.0, cos))
    shrk = _shrinkage(di.box.center, dj.box.center, hdr)
    return -shrk * cos if literal else -shrk * (1.0 - cos)


def build_similarity(dets: Sequence[Detection], hdr: StreamHeader,
                     preference: float | str = "median",
                     literal: bool = False) -> np.ndarray:
    """Dense similarity matrix with the preference on the diagonal."""
    n = len(dets)
    if n == 0:
        raise ValueError("need at least one detection")
    emb = np.stack([d.embedding for d in dets])
    norms = np.sqrt(np.einsum("ij,ij->i", emb, emb))
    if np.any(norms == 0.0):
        raise DegenerateEmbeddingError("zero-norm embedding")
    cos = np.clip((emb @ emb.T) / np.outer(norms, norms), -1.0, 1.0)
    centers = np.array([d.box.center for d in dets])
    diff = centers[:, None, :] - centers[None, :, :]
    rel2 = np.einsum("ijk,ijk->ij", diff, diff) / (hdr.diagonal ** 2)
    shrk = hdr.quality_scale * (REFERENCE_FPS / hdr.fps) * rel2
    S = -shrk * cos if literal else -shrk * (1.0 - cos)
    if preference == "median":
        off = S[~np.eye(n, dtype=bool)]
        pref = float(np.median(off)) if off.size else 0.0
    else:
        pref = float(preference)
    np.fill_diagonal(S, pref)
    return S


# ---------------------------------------------------------------------------
# Message passing
# ---------------------------------------------------------------------------

def _project_assignments(S, R, A) -> np.ndarray:
    """Final assignments with every exemplar indexing itself.

    Points voting for themselves form the exemplar set; everyone else joins
    the most similar exemplar.  Falls back to the strongest self-evidence
    point when no one self-votes.
    """
    n = S.shape[0]
    c = np.argmax(A + R, axis=1)
    exemplars = np.flatnonzero(c == np.arange(n))
    if exemplars.size == 0:
        exemplars = np.array([int(np.argmax(np.diag(A + R)))])
    c_final = exemplars[np.argmax(S[:, exemplars], axis=1)]
    c_final[exemplars] = exemplars
    return c_final


def _converge(S, R, A, damping, max_iters, stable_window,
              check_finite=False, sweep_times=None):
    """Run damped sweeps until assignments hold still; returns (c, conv, it)."""
    n = S.shape[0]
    if n == 1:
        return np.zeros(1, dtype=np.intp), True, 0
    prev_e = None
    stable = 0
    iters = 0
    converged = False
    while iters < max_iters:
        t0 = time.perf_counter()
        ap_sweep(S, R, A, damping)
        if sweep_times is not None:
            sweep_times.append(time.perf_counter() - t0)
        iters += 1
        if check_finite and not (np.all(np.isfinite(R)) and np.all(np.isfinite(A))):
            raise FloatingPointError("message matrices left the finite range")
        # assignments are stable once the self-evidence pattern stops moving;
        # an empty exemplar set never counts as converged
        e = (np.diag(A) + np.diag(R)) > 0.0
        if prev_e is not None and np.array_equal(e, prev_e):
            stable += 1
        else:
            stable = 0
        prev_e = e
        if stable >= stable_window and e.any():
            converged = True
            break
    return _project_assignments(S, R, A), converged, iters


def _rescue_window(stable_window: int, damping: float,
                   rescue_damping: float) -> int:
    """Stability span for the heavy-damping retry.

    Messages move by a factor (1 - damping) per sweep, so a stretch that is
    merely frozen (not fixed) survives ~1/(1 - damping) times longer.  The
    window scales accordingly or early transients would pass the check.
    """
    return math.ceil(stable_window * (1.0 - damping) / (1.0 - rescue_damping))


def ap_batch(S: np.ndarray, damping: float = 0.5, max_iters: int = 200,
             stable_window: int = 10, detections: Sequence[Detection] = (),
             check_finite: bool = False, sweep_times=None,
             rescue_damping: float | None = 0.9) -> ClusterState:
    """Batch affinity propagation from zero-initialized messages.

    If the run at ``damping`` hits ``max_iters`` without stabilizing, one
    retry from zeros at ``rescue_damping`` is attempted (with the stability
    span scaled to the slower message movement).  The returned state records
    the damping that produced it.
    """
    if not 0.0 <= damping < 1.0:
        raise ValueError(f"damping must be in [0,1), got {damping}")
    S = np.ascontiguousarray(S, dtype=np.float64)
    if not np.all(np.isfinite(S)):
        raise ValueError("similarity matrix must be finite")
    n = S.shape[0]
    R = np.zeros((n, n))
    A = np.zeros((n, n))
    c, converged, iters = _converge(S, R, A, damping, max_iters, stable_window,
                                    check_finite, sweep_times)
    if not converged and rescue_damping is not None and rescue_damping > damping:
        R[:] = 0.0
        A[:] = 0.0
        window = _rescue_window(stable_window, damping, rescue_damping)
        damping = rescue_damping
        c, converged, iters = _converge(S, R, A, damping, max_iters,
                                        window, check_finite, sweep_times)
    return ClusterState(S=S, R=R, A=A, assignments=c,
                        detections=list(detections), damping=damping,
                        converged=converged, iterations=iters)


def net_similarity(S: np.ndarray, assignments: np.ndarray) -> float:
    """Sum of member-to-exemplar similarities; exemplars count their preference."""
    return float(sum(S[i, c] for i, c in enumerate(assignments)))


def exhaustive_optimum(S: np.ndarray) -> tuple[float, np.ndarray]:
    """Best net similarity over all nonempty exemplar sets (n <= ~12)."""
    n = S.shape[0]
    best = -np.inf
    best_c = None
    for mask in range(1, 1 << n):
        ex = [k for k in range(n) if mask >> k & 1]
        cols = S[:, ex]
        pick = np.argmax(cols, axis=1)
        total = 0.0
        for i in range(n):
            total += S[i, i] if i in ex else cols[i, pick[i]]
        if total > best:
            best = total
            best_c = np.array([i if i in ex else ex[pick[i]] for i in range(n)])
    return best, best_c


# ---------------------------------------------------------------------------
# Incremental extension
# ---------------------------------------------------------------------------

def extend_state(prev: ClusterState, S_new: np.ndarray, n_new: int) -> ClusterState:
    """Graft n_new points onto an existing state without re-running AP.

    Each new point inherits the responsibility/availability rows and columns
    of its most similar retained point; the new-new block starts at zero.
    The result is unconverged: callers resume message passing.
    """
    M = prev.n
    N = M + n_new
    if S_new.shape != (N, N):
        raise StateError(f"similarity is {S_new.shape}, expected ({N}, {N})")
    if n_new == 0:
        return prev
    R = np.zeros((N, N))
    A = np.zeros((N, N))
    R[:M, :M] = prev.R
    A[:M, :M] = prev.A
    nn = np.argmax(S_new[M:, :M], axis=1)  # most similar retained point
    for k in range(n_new):
        src = nn[k]
        R[M + k, :M] = prev.R[src, :M]
        A[M + k, :M] = prev.A[src, :M]
        R[:M, M + k] = prev.R[:M, src]
        A[:M, M + k] = prev.A[:M, src]
    assignments = np.concatenate([prev.assignments, prev.assignments[nn]])
    return ClusterState(S=S_new, R=R, A=A, assignments=assignments,
                        detections=list(prev.detections), damping=prev.damping,
                        converged=False, iterations=prev.iterations)


def piap_step(prev: ClusterState | None, segment_dets: Sequence[Detection],
              hdr: StreamHeader, config: ClusterConfig | None = None,
              sweep_times=None) -> ClusterState:
    """Absorb one segment's detections and reconverge the cluster state."""
    cfg = config or ClusterConfig()
    if prev is None or prev.n == 0:
        if not segment_dets:
            return ClusterState(S=np.zeros((0, 0)), R=np.zeros((0, 0)),
                                A=np.zeros((0, 0)),
                                assignments=np.zeros(0, dtype=np.intp),
                                detections=[], damping=cfg.damping)
        S = build_similarity(segment_dets, hdr, cfg.preference,
                             cfg.literal_similarity)
        return ap_batch(S, cfg.damping, cfg.max_iters, cfg.stable_window,
                        detections=segment_dets, check_finite=cfg.check_finite,
                        sweep_times=sweep_times,
                        rescue_damping=cfg.rescue_damping)
    if not segment_dets:
        return prev
    dets = list(prev.detections) + list(segment_dets)
    S = build_similarity(dets, hdr, cfg.preference, cfg.literal_similarity)
    state = extend_state(prev, S, len(segment_dets))
    state.detections = dets
    c, converged, iters = _converge(S, state.R, state.A, cfg.damping,
                                    cfg.max_iters, cfg.stable_window,
                                    cfg.check_finite, sweep_times)
    if not converged and cfg.rescue_damping is not None \
            and cfg.rescue_damping > cfg.damping:
        # warm continuation kept oscillating: restart cold with heavy damping
        state.R[:] = 0.0
        state.A[:] = 0.0
        window = _rescue_window(cfg.stable_window, cfg.damping,
                                cfg.rescue_damping)
        c, converged, iters = _converge(S, state.R, state.A,
                                        cfg.rescue_damping, cfg.max_iters,
                                        window, cfg.check_finite,
                                        sweep_times)
        state.damping = cfg.rescue_damping
    state.assignments = c
    state.converged = converged
    state.iterations = iters
    return state


def compact_state(state: ClusterState, window: int) -> tuple[ClusterState, np.ndarray]:
    """Drop detections older than ``window`` frames behind the newest one.

    Each cluster's exemplar is retained regardless of age, acting as the
    representative that carries the identity across compaction.  Returns the
    compacted state and the retained original indices (callers use these to
    carry per-detection labels).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if state.n == 0:
        return state, np.zeros(0, dtype=np.intp)
    frames = np.array([d.frame for d in state.detections])
    cutoff = frames.max() - window
    keep = frames > cutoff
    keep[state.exemplars()] = True
    idx = np.flatnonzero(keep)
    if idx.size == state.n:
        return state, idx
    sub = np.ix_(idx, idx)
    old_to_new = -np.ones(state.n, dtype=np.intp)
    old_to_new[idx] = np.arange(idx.size)
    return ClusterState(S=state.S[sub], R=state.R[sub], A=state.A[sub],
                        assignments=old_to_new[state.assignments[idx]],
                        detections=[state.detections[i] for i in idx],
                        damping=state.damping, converged=state.converged,
                        iterations=state.iterations), idx
