"""Trajectory repair: fill interior gaps with model predictions and let
loose candidate boxes compete for gap frames under a residual gate.

Hyperparameters are fit once per trajectory on a thinned sample subset;
every gap is then predicted from a local context window around it, which
keeps long streams with many one-frame dropouts cheap while preserving
local accuracy.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import gp
from .core import BoundingBox, Detection
from .tracks import Sample, Trajectory

MIN_GP_POINTS = 4
CONTEXT_PER_SIDE = 60
FIT_SUBSET = 120
CENTER_GATE_SCALE = 1.0
MIN_BOX_SIDE = 1.0


def _channels(samples: Sequence[Sample]) -> np.ndarray:
    out = np.empty((len(samples), 4))
    for i, s in enumerate(samples):
        cx, cy = s.box.center
        out[i] = (cx, cy, s.box.w, s.box.h)
    return out


def _box_from_channels(c) -> BoundingBox:
    cx, cy, w, h = (float(v) for v in c)
    w = max(w, MIN_BOX_SIDE)
    h = max(h, MIN_BOX_SIDE)
    return BoundingBox(cx - w / 2.0, cy - h / 2.0, w, h)


def fit_trajectory_params(traj: Trajectory, fps: float,
                          mu=None, sd=None) -> gp.GPParams | None:
    """Hyperparameters from an evenly thinned subset; None when the
    trajectory is too short to support a model."""
    if traj.n_samples < MIN_GP_POINTS:
        return None
    if mu is None or sd is None:
        _, mu, sd = gp.standardize(_channels(traj.samples))
    stride = max(1, -(-traj.n_samples // FIT_SUBSET))
    subset = traj.samples[::stride]
    z = np.array([s.frame for s in subset], dtype=np.float64) / fps
    Xs = (_channels(subset) - mu) / sd
    return gp.fit(z, Xs)


def _predict_gap(samples, lo, hi, gap_frames, params, mu, sd, fps):
    """Posterior over gap frames from the local context [lo:hi)."""
    ctx = samples[lo:hi]
    z = np.array([s.frame for s in ctx], dtype=np.float64) / fps
    Xs = (_channels(ctx) - mu) / sd
    zq = np.asarray(gap_frames, dtype=np.float64) / fps
    mean_s, var_s = gp.predict(z, Xs, params, zq)
    mean = mean_s * sd + mu
    var = var_s[:, None] * sd[None, :] ** 2
    return mean, var


def _linear_fill(samples: Sequence[Sample], gap_frames) -> np.ndarray:
    frames = np.array([s.frame for s in samples], dtype=np.float64)
    X = _channels(samples)
    out = np.empty((len(gap_frames), 4))
    for j in range(4):
        out[:, j] = np.interp(gap_frames, frames, X[:, j])
    return out


def refine_trajectory(traj: Trajectory, fps: float,
                      proposals_by_frame: Mapping[int, Sequence[Detection]] | None = None,
                      alpha: float = 0.05) -> Trajectory:
    """Return a copy of ``traj`` with every interior gap filled.

    Gap frames prefer a gated candidate box when one is consistent with the
    model (smallest residual statistic wins); otherwise the posterior mean
    box is inserted.  Trajectories too short for a model fall back to linear
    interpolation and accept no candidates.
    """
    gaps = traj.gap_runs()
    if not gaps:
        return traj
    proposals_by_frame = proposals_by_frame or {}
    _, mu, sd = gp.standardize(_channels(traj.samples))
    params = fit_trajectory_params(traj, fps, mu, sd)
    threshold = gp.chi2_quantile(4, alpha)
    frames = traj.frames()
    filled: list[Sample] = []
    for a, b in gaps:
        gap_frames = list(range(a, b + 1))
        if params is None:
            mean = _linear_fill(traj.samples, gap_frames)
            filled.extend(Sample(f, _box_from_channels(mean[i]), "gp")
                          for i, f in enumerate(gap_frames))
            continue
        hi = int(np.searchsorted(frames, a))  # first sample past the gap start
        lo = max(0, hi - CONTEXT_PER_SIDE)
        hi_end = min(len(frames), hi + CONTEXT_PER_SIDE)
        mean, var = _predict_gap(traj.samples, lo, hi_end, gap_frames,
                                 params, mu, sd, fps)
        for i, f in enumerate(gap_frames):
            pred_box = _box_from_channels(mean[i])
            adopted = None
            best_w = np.inf
            gate_radius = CENTER_GATE_SCALE * float(
                np.hypot(pred_box.w, pred_box.h))
            for cand in proposals_by_frame.get(f, ()):
                ccx, ccy = cand.box.center
                pcx, pcy = pred_box.center
                if np.hypot(ccx - pcx, ccy - pcy) > gate_radius:
                    continue
                obs = np.array([ccx, ccy, cand.box.w, cand.box.h])
                w_stat = gp.wilks_statistic(obs, mean[i], var[i])
                if w_stat <= threshold and w_stat < best_w:
                    best_w = w_stat
                    adopted = cand
            if adopted is not None:
                filled.append(Sample(f, adopted.box, "proposal"))
            else:
                filled.append(Sample(f, pred_box, "gp"))
    merged = sorted(traj.samples + filled, key=lambda s: s.frame)
    return Trajectory(cluster=traj.cluster, samples=merged)


def refine(trajectories: Iterable[Trajectory], fps: float,
           proposals: Sequence[Detection] = (),
           alpha: float = 0.05) -> list[Trajectory]:
    by_frame: dict[int, list[Detection]] = defaultdict(list)
    for det in proposals:
        by_frame[det.frame].append(det)
    return [refine_trajectory(t, fps, by_frame, alpha) for t in trajectories]
