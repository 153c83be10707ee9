"""End-to-end engine: segmented incremental clustering with persistent
cluster ids, trajectory assembly and pruning, gap refinement, and mask
planning.

Cluster ids returned to callers are stable across the whole stream even
though the underlying message-passing state is periodically compacted: each
exemplar group claims the id carried by the majority of its retained
members, and once a detection's id is emitted it is never revised.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ._kernels import active_path
from .affinity import ClusterConfig, ClusterState, compact_state, piap_step
from .blur import MODES, AppliedMask, plan_masks, write_mask_log
from .core import Detection, StreamHeader, segment_stream
from .refine import refine
from .tracks import (MIN_DENSITY, MIN_SUPPORT, assemble, prune_unstable,
                     write_trajectories)

DEFAULT_SEGMENT_LEN = 90
DEFAULT_WINDOW = 90
EXEMPT_COSINE = 0.8


@dataclass
class PipelineConfig:
    segment_len: int = DEFAULT_SEGMENT_LEN
    window: int = DEFAULT_WINDOW
    min_support: int = MIN_SUPPORT
    min_density: float = MIN_DENSITY
    alpha: float = 0.05
    mode: str = "gaussian"
    sigma: Optional[float] = None
    block: int = 16
    margin: float = 0.0
    damping: float = 0.5
    literal_similarity: bool = False
    exempt_threshold: float = EXEMPT_COSINE

    def __post_init__(self):
        if self.segment_len < 1 or self.window < 1:
            raise ValueError("segment_len and window must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown mask mode {self.mode!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.margin < 0.0:
            raise ValueError("margin must be >= 0")
        if not 0.0 < self.exempt_threshold <= 1.0:
            raise ValueError("exempt_threshold must be in (0, 1]")

    def cluster_config(self) -> ClusterConfig:
        return ClusterConfig(damping=self.damping,
                             literal_similarity=self.literal_similarity)


class StreamClusterer:
    """Feeds detection segments through incremental clustering and maps the
    ephemeral exemplar labels onto persistent ids.

    Ids already handed out are frozen; only the forward-looking carrier
    labels on retained detections move when cluster structure shifts.
    """

    def __init__(self, header: StreamHeader,
                 config: ClusterConfig | None = None,
                 window: int = DEFAULT_WINDOW):
        self.header = header
        self.config = config or ClusterConfig()
        self.window = window
        self._state: ClusterState | None = None
        self._carried: list[int] = []
        self._next_id = 0
        self.sweep_seconds: list[float] = []

    def feed(self, detections: Sequence[Detection]) -> list[int]:
        """Cluster one segment; returns a persistent id per detection."""
        if not detections and (self._state is None or self._state.n == 0):
            return []
        n_prev = self._state.n if self._state is not None else 0
        state = piap_step(self._state, detections, self.header, self.config,
                          sweep_times=self.sweep_seconds)
        if state is self._state:
            return []

        groups: dict[int, list[int]] = {}
        for i, ex in enumerate(state.assignments):
            groups.setdefault(int(ex), []).append(i)

        # Each group bids for the id most of its retained members carry.
        # Strongest bid wins a contested id (a junk singleton that drifted
        # through a cluster must not steal the id from the cluster itself);
        # losers and voteless groups get fresh ids in exemplar order.
        bids = []
        for ex in sorted(groups):
            votes: dict[int, int] = {}
            for i in groups[ex]:
                if i < n_prev:
                    pid = self._carried[i]
                    votes[pid] = votes.get(pid, 0) + 1
            if votes:
                best = max(votes.values())
                winner = min(p for p, c in votes.items() if c == best)
                bids.append((-best, ex, winner))
        claimed: set[int] = set()
        assigned: dict[int, int] = {}
        for _, ex, winner in sorted(bids):
            if winner not in claimed:
                claimed.add(winner)
                assigned[ex] = winner
        carried = [-1] * state.n
        for ex in sorted(groups):
            pid = assigned.get(ex)
            if pid is None:
                pid = self._next_id
                self._next_id += 1
            for i in groups[ex]:
                carried[i] = pid

        out = carried[n_prev:]
        self._state, kept = compact_state(state, self.window)
        if self._state is state:
            self._carried = carried
        else:
            self._carried = [carried[i] for i in kept]
        if self._next_id <= max(carried, default=-1):
            self._next_id = max(carried) + 1
        return out

    @property
    def n_retained(self) -> int:
        return self._state.n if self._state is not None else 0


@dataclass
class PipelineResult:
    header: StreamHeader
    trajectories: list
    masks: list
    assignments: list  # (Detection, persistent id) in emission order
    exempt: set
    timing: dict = field(default_factory=dict)


def load_references(path) -> np.ndarray:
    """Reference embeddings (one JSON object with an "emb" list per line)
    used to exempt matching clusters from masking."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            rows.append(np.asarray(json.loads(raw)["emb"], dtype=np.float64))
    if not rows:
        return np.zeros((0, 0))
    refs = np.stack(rows)
    norms = np.linalg.norm(refs, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("reference embedding has zero norm")
    return refs / norms


def cluster_means(assignments: Sequence[tuple[Detection, int]]) -> dict:
    """Normalized mean embedding per persistent cluster id."""
    sums: dict[int, np.ndarray] = {}
    for det, pid in assignments:
        if pid in sums:
            sums[pid] = sums[pid] + det.embedding
        else:
            sums[pid] = det.embedding.copy()
    means = {}
    for pid in sorted(sums):
        v = sums[pid]
        n = np.linalg.norm(v)
        if n > 0.0:
            means[pid] = v / n
    return means


def match_references(means: dict, references: Optional[np.ndarray],
                     threshold: float = EXEMPT_COSINE) -> set:
    if references is None or references.size == 0:
        return set()
    exempt = set()
    for pid in sorted(means):
        cos = references @ means[pid]
        if float(np.max(cos)) >= threshold:
            exempt.add(pid)
    return exempt


def _percentiles_ms(samples: Sequence[float]) -> dict:
    if not samples:
        return {"count": 0, "p50_ms": 0.0, "p95_ms": 0.0}
    arr = np.asarray(samples) * 1000.0
    return {"count": int(arr.size),
            "p50_ms": float(np.percentile(arr, 50)),
            "p95_ms": float(np.percentile(arr, 95))}


def run(header: StreamHeader, detections: Iterable[Detection],
        config: PipelineConfig | None = None,
        references: Optional[np.ndarray] = None) -> PipelineResult:
    """Process one detection stream into trajectories and a mask plan."""
    cfg = config or PipelineConfig()

    cluster_feed: list[Detection] = []
    candidates: list[Detection] = []
    for det in detections:
        (cluster_feed if det.source == "detector" else candidates).append(det)

    t0 = time.perf_counter()
    clusterer = StreamClusterer(header, cfg.cluster_config(),
                                window=cfg.window)
    emitted: list[Detection] = []
    labels: list[int] = []
    segment_seconds: list[float] = []
    for seg in segment_stream(cluster_feed, cfg.segment_len):
        ts = time.perf_counter()
        ids = clusterer.feed(seg.detections)
        segment_seconds.append(time.perf_counter() - ts)
        emitted.extend(seg.detections)
        labels.extend(ids)
    cluster_seconds = time.perf_counter() - t0

    trajectories = prune_unstable(assemble(emitted, labels),
                                  cfg.min_support, cfg.min_density)

    t1 = time.perf_counter()
    trajectories = refine(trajectories, header.fps, candidates, cfg.alpha)
    refine_seconds = time.perf_counter() - t1

    assignments = list(zip(emitted, labels))
    exempt = match_references(cluster_means(assignments), references,
                              cfg.exempt_threshold)

    t2 = time.perf_counter()
    by_frame: dict[int, list] = {}
    for traj in trajectories:
        if traj.cluster in exempt:
            continue
        for s in traj.samples:
            by_frame.setdefault(s.frame, []).append((traj.cluster, s.box))
    masks: list[AppliedMask] = []
    for frame in sorted(by_frame):
        masks.extend(plan_masks(frame, by_frame[frame], header.width,
                                header.height, cfg.margin))
    plan_seconds = time.perf_counter() - t2

    last_frame = emitted[-1].frame if emitted else -1
    timing = {
        "n_frames": last_frame + 1,
        "n_detections": len(cluster_feed) + len(candidates),
        "kernel_path": active_path(),
        "stages": {
            "cluster": {"total_s": cluster_seconds,
                        **_percentiles_ms(segment_seconds)},
            "refine": {"total_s": refine_seconds},
            "plan_masks": {"total_s": plan_seconds},
        },
        "sweeps": _percentiles_ms(clusterer.sweep_seconds),
    }
    return PipelineResult(header=header, trajectories=trajectories,
                          masks=masks, assignments=assignments,
                          exempt=exempt, timing=timing)


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------

def assignment_line(det: Detection, pid: int) -> str:
    return json.dumps({"frame": det.frame, "cluster": pid,
                       "box": det.box.as_list()}, separators=(",", ":"))


def write_artifacts(result: PipelineResult, out_dir):
    """Write trajectories, mask log, per-detection assignments and timing.

    Everything except timing.json is byte-deterministic for a given input
    stream and configuration.
    """
    os.makedirs(out_dir, exist_ok=True)
    write_trajectories(os.path.join(out_dir, "trajectories.jsonl"),
                       result.trajectories)
    write_mask_log(os.path.join(out_dir, "masks.jsonl"), result.masks)
    with open(os.path.join(out_dir, "assignments.jsonl"), "w",
              encoding="utf-8") as fh:
        for det, pid in result.assignments:
            fh.write(assignment_line(det, pid) + "\n")
    with open(os.path.join(out_dir, "timing.json"), "w",
              encoding="utf-8") as fh:
        json.dump(result.timing, fh, indent=2)
        fh.write("\n")
