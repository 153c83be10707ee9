"""Per-cluster trajectories: assembly from labeled detections, gap discovery,
stability pruning, and the line-delimited JSON output format.

A trajectory is the frame-ordered box record of one cluster.  Frames holding
several detections of the same cluster keep only the highest-confidence one,
so downstream interpolation sees at most one box per frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import SOURCES, BoundingBox, Detection

MIN_SUPPORT = 5
MIN_DENSITY = 0.3


@dataclass(frozen=True)
class Sample:
    frame: int
    box: BoundingBox
    source: str = "detector"

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")


@dataclass
class Trajectory:
    cluster: int
    samples: list[Sample] = field(default_factory=list)

    @property
    def span(self) -> tuple[int, int]:
        if not self.samples:
            raise ValueError("empty trajectory has no span")
        return (self.samples[0].frame, self.samples[-1].frame)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def density(self) -> float:
        a, b = self.span
        return self.n_samples / (b - a + 1)

    def frames(self) -> list[int]:
        return [s.frame for s in self.samples]

    def gap_runs(self) -> list[tuple[int, int]]:
        """Maximal interior runs of frames with no sample, inclusive ends."""
        runs = []
        for prev, cur in zip(self.samples, self.samples[1:]):
            if cur.frame > prev.frame + 1:
                runs.append((prev.frame + 1, cur.frame - 1))
        return runs


def assemble(detections: Sequence[Detection],
             labels: Sequence[int]) -> list[Trajectory]:
    """Group labeled detections into frame-ordered trajectories.

    Ties on a frame resolve to the higher confidence, then to the earlier
    detection in stream order; output is sorted by cluster id.
    """
    if len(detections) != len(labels):
        raise ValueError("labels must align with detections")
    chosen: dict[int, dict[int, tuple[float, int, Detection]]] = {}
    for order, (det, lab) in enumerate(zip(detections, labels)):
        lab = int(lab)
        per_frame = chosen.setdefault(lab, {})
        best = per_frame.get(det.frame)
        if best is None or det.confidence > best[0]:
            per_frame[det.frame] = (det.confidence, order, det)
    out = []
    for lab in sorted(chosen):
        samples = [Sample(frame=f, box=entry[2].box, source=entry[2].source)
                   for f, entry in sorted(chosen[lab].items())]
        out.append(Trajectory(cluster=lab, samples=samples))
    return out


def prune_unstable(trajectories: Iterable[Trajectory],
                   min_support: int = MIN_SUPPORT,
                   min_density: float = MIN_DENSITY) -> list[Trajectory]:
    """Drop short or sparse trajectories (likely spurious clusters)."""
    return [t for t in trajectories
            if t.n_samples >= min_support and t.density >= min_density]


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------

def trajectory_line(traj: Trajectory) -> str:
    a, b = traj.span
    return json.dumps({
        "cluster": traj.cluster,
        "span": [a, b],
        "samples": [[s.frame, s.box.x, s.box.y, s.box.w, s.box.h, s.source]
                    for s in traj.samples],
    }, separators=(",", ":"))


def write_trajectories(path, trajectories: Iterable[Trajectory]):
    with open(path, "w", encoding="utf-8") as fh:
        for traj in trajectories:
            fh.write(trajectory_line(traj) + "\n")


def read_trajectories(path) -> list[Trajectory]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            samples = [Sample(frame=int(f), box=BoundingBox(x, y, w, h),
                              source=src)
                       for f, x, y, w, h, src in obj["samples"]]
            traj = Trajectory(cluster=int(obj["cluster"]), samples=samples)
            if traj.samples and list(obj["span"]) != list(traj.span):
                raise ValueError(
                    f"span {obj['span']} disagrees with samples {traj.span}")
            out.append(traj)
    return out
