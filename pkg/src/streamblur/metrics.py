"""Evaluation: box matching against ground truth, coverage rates, and how
cleanly clusters map onto true identities.

Matching is per-frame greedy one-to-one on descending overlap with
deterministic tie order, then counts are pooled over the whole stream.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .blur import AppliedMask
from .core import BoundingBox

IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class GroundTruthBox:
    frame: int
    identity: int
    box: BoundingBox
    must_blur: bool = True


def iou(a: BoundingBox, b: BoundingBox) -> float:
    ix = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    if inter == 0.0:
        return 0.0
    return inter / (a.w * a.h + b.w * b.h - inter)


def match_boxes(pred: Sequence[BoundingBox], gt: Sequence[BoundingBox],
                threshold: float = IOU_THRESHOLD) -> list[tuple[int, int]]:
    """Greedy one-to-one matching, best overlap first.

    Ties break on the lower prediction index, then the lower truth index,
    so results never depend on input hashing.
    """
    candidates = []
    for pi, pb in enumerate(pred):
        for gi, gb in enumerate(gt):
            v = iou(pb, gb)
            if v >= threshold:
                candidates.append((-v, pi, gi))
    candidates.sort()
    used_p: set[int] = set()
    used_g: set[int] = set()
    matches = []
    for _, pi, gi in candidates:
        if pi in used_p or gi in used_g:
            continue
        used_p.add(pi)
        used_g.add(gi)
        matches.append((pi, gi))
    return matches


@dataclass
class CoverageReport:
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    purity_pairs: list = field(default_factory=list)
    clusters: set = field(default_factory=set)

    @property
    def precision(self) -> float:
        denom = self.true_positives + self.false_positives
        return self.true_positives / denom if denom else 1.0

    @property
    def recall(self) -> float:
        denom = self.true_positives + self.false_negatives
        return self.true_positives / denom if denom else 1.0


def evaluate_masks(masks: Iterable[AppliedMask],
                   truth: Iterable[GroundTruthBox],
                   threshold: float = IOU_THRESHOLD) -> CoverageReport:
    """Pooled coverage of applied masks against must-blur ground truth.

    A mask matched to an exempt face counts as a false positive (it blurred
    someone it should not have).  Unmatched masks take identity -1 in the
    purity pairing.
    """
    masks_by_frame: dict[int, list[AppliedMask]] = defaultdict(list)
    for m in masks:
        masks_by_frame[m.frame].append(m)
    truth_by_frame: dict[int, list[GroundTruthBox]] = defaultdict(list)
    for t in truth:
        truth_by_frame[t.frame].append(t)

    rep = CoverageReport()
    for frame in sorted(set(masks_by_frame) | set(truth_by_frame)):
        ms = masks_by_frame.get(frame, [])
        ts = truth_by_frame.get(frame, [])
        pred_boxes = [BoundingBox(m.x, m.y, m.w, m.h) for m in ms]
        matches = match_boxes(pred_boxes, [t.box for t in ts], threshold)
        matched_p = {pi for pi, _ in matches}
        matched_t = {gi for _, gi in matches}
        for pi, gi in matches:
            rep.clusters.add(ms[pi].cluster)
            rep.purity_pairs.append((ms[pi].cluster, ts[gi].identity))
            if ts[gi].must_blur:
                rep.true_positives += 1
            else:
                rep.false_positives += 1
        for pi, m in enumerate(ms):
            rep.clusters.add(m.cluster)
            if pi not in matched_p:
                rep.false_positives += 1
                rep.purity_pairs.append((m.cluster, -1))
        for gi, t in enumerate(ts):
            if gi not in matched_t and t.must_blur:
                rep.false_negatives += 1
    return rep


def weighted_cluster_purity(pairs: Sequence[tuple[int, int]]) -> float:
    """Size-weighted purity of cluster-to-identity pairs.

    Each cluster contributes its dominant-identity fraction weighted by its
    size; an empty pairing is perfectly pure.
    """
    if not pairs:
        return 1.0
    per_cluster: dict[int, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for cluster, identity in pairs:
        per_cluster[cluster][identity] += 1
    total = len(pairs)
    weighted = 0.0
    for counts in per_cluster.values():
        weighted += max(counts.values())
    return weighted / total


# ---------------------------------------------------------------------------
# Ground-truth wire format
# ---------------------------------------------------------------------------

def ground_truth_line(t: GroundTruthBox) -> str:
    return json.dumps({"frame": t.frame, "id": t.identity,
                       "box": t.box.as_list(), "must_blur": t.must_blur},
                      separators=(",", ":"))


def write_ground_truth(path, truth: Iterable[GroundTruthBox]):
    with open(path, "w", encoding="utf-8") as fh:
        for t in truth:
            fh.write(ground_truth_line(t) + "\n")


def read_ground_truth(path) -> list[GroundTruthBox]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            out.append(GroundTruthBox(
                frame=int(obj["frame"]), identity=int(obj["id"]),
                box=BoundingBox(*(float(v) for v in obj["box"])),
                must_blur=bool(obj.get("must_blur", True))))
    return out
