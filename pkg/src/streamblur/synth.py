"""Synthetic scene generator for exercising the full pipeline.

Produces a detection stream with known ground truth: a few well-separated
identities moving on smooth paths, detector dropouts (scattered and in
bursts), occasional spurious detections with off-manifold embeddings, and
loose low-confidence proposals inside dropped stretches.  Everything is
driven by one seeded generator so output is reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import BoundingBox, Detection, StreamHeader
from .metrics import GroundTruthBox

# Identity anchors sit on a grid with this spacing (fraction of the frame
# diagonal) so clusters stay unambiguous even under path wiggle.
ANCHOR_SPACING = 0.30
ANCHOR_MARGIN = 120.0


@dataclass
class SceneConfig:
    n_faces: int = 3
    n_frames: int = 3000
    fps: float = 30.0
    width: int = 1280
    height: int = 720
    embedding_dim: int = 16
    embedding_noise: float = 0.02
    p_fn: float = 0.05
    p_fp: float = 0.02
    proposal_rate: float = 0.6
    burst_frames: tuple = (8, 20)
    box_size: tuple = (48.0, 72.0)
    wiggle: float = 18.0
    quality_scale: float = 1.0
    exempt: tuple = ()

    def __post_init__(self):
        if self.n_faces < 1:
            raise ValueError("need at least one face")
        if self.n_frames < 1:
            raise ValueError("need at least one frame")
        if not 0.0 <= self.p_fn < 1.0 or not 0.0 <= self.p_fp < 1.0:
            raise ValueError("dropout and spurious rates must be in [0, 1)")
        if self.embedding_dim < self.n_faces + 1:
            raise ValueError("embedding_dim too small for distinct identities")


@dataclass
class SynthScene:
    header: StreamHeader
    detections: list
    truth: list
    identity_embeddings: np.ndarray
    # true identity per detection, -1 for spurious; parallel to detections
    labels: list = field(default_factory=list)
    face_colors: list = field(default_factory=list)
    # per-face per-frame true geometry, kept for rendering
    geometry: Optional[np.ndarray] = None


def _anchor_grid(config: SceneConfig) -> list[tuple[float, float]]:
    diag = math.hypot(config.width, config.height)
    spacing = ANCHOR_SPACING * diag
    margin = min(ANCHOR_MARGIN, config.width / 4.0, config.height / 4.0)
    xs = []
    x = margin
    while x <= config.width - margin:
        xs.append(x)
        x += spacing
    ys = []
    y = margin
    while y <= config.height - margin:
        ys.append(y)
        y += spacing
    slots = [(sx, sy) for sy in ys for sx in xs]
    if len(slots) < config.n_faces:
        raise ValueError(
            f"frame {config.width}x{config.height} only fits {len(slots)} "
            f"separated faces, requested {config.n_faces}")
    return slots[:config.n_faces]


def _identity_basis(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, n)))
    return q.T.copy()


def _noisy_embedding(rng, base: np.ndarray, tau: float) -> np.ndarray:
    e = base + tau * rng.standard_normal(base.shape[0])
    return e / np.linalg.norm(e)


def _off_manifold_embedding(rng, basis: np.ndarray) -> np.ndarray:
    # orthogonal complement of the identity subspace, so cosine against
    # every real identity is ~0
    g = rng.standard_normal(basis.shape[1])
    g = g - basis.T @ (basis @ g)
    n = np.linalg.norm(g)
    if n < 1e-9:
        g = rng.standard_normal(basis.shape[1])
        g = g - basis.T @ (basis @ g)
        n = np.linalg.norm(g)
    return g / n


def _dropout_mask(rng, config: SceneConfig) -> np.ndarray:
    """Per-frame drop indicator for one face.

    Half the budget is scattered misses, half goes into contiguous bursts
    placed away from the stream ends so gaps stay interior.
    """
    n = config.n_frames
    dropped = rng.random(n) < (config.p_fn / 2.0)
    lo, hi = config.burst_frames
    mean_len = (lo + hi) / 2.0
    n_bursts = int(round(n * (config.p_fn / 2.0) / mean_len))
    start_lo = max(1, int(0.05 * n))
    for _ in range(n_bursts):
        length = int(rng.integers(lo, hi + 1))
        start_hi = max(start_lo + 1, int(0.95 * n) - length)
        start = int(rng.integers(start_lo, start_hi))
        dropped[start:start + length] = True
    # the first and last frames always detect, anchoring trajectory spans
    if n > 1:
        dropped[0] = False
        dropped[-1] = False
    return dropped


def generate(config: SceneConfig, seed: int) -> SynthScene:
    rng = np.random.default_rng(seed)
    header = StreamHeader(fps=config.fps, width=config.width,
                          height=config.height,
                          embedding_dim=config.embedding_dim,
                          quality_scale=config.quality_scale)

    basis = _identity_basis(rng, config.n_faces, config.embedding_dim)
    anchors = _anchor_grid(config)

    fsz = rng.uniform(config.box_size[0], config.box_size[1],
                      size=config.n_faces)
    aspect = rng.uniform(1.05, 1.35, size=config.n_faces)
    freq = rng.uniform(0.15, 0.45, size=(config.n_faces, 2))
    phase = rng.uniform(0.0, 2.0 * math.pi, size=(config.n_faces, 2))
    colors = [tuple(int(v) for v in rng.integers(150, 230, size=3))
              for _ in range(config.n_faces)]

    t = np.arange(config.n_frames) / config.fps
    geometry = np.empty((config.n_faces, config.n_frames, 4))
    for i, (ax, ay) in enumerate(anchors):
        w = fsz[i]
        h = fsz[i] * aspect[i]
        cx = ax + config.wiggle * np.sin(2 * math.pi * freq[i, 0] * t + phase[i, 0])
        cy = ay + config.wiggle * np.sin(2 * math.pi * freq[i, 1] * t + phase[i, 1])
        geometry[i, :, 0] = cx - w / 2.0
        geometry[i, :, 1] = cy - h / 2.0
        geometry[i, :, 2] = w
        geometry[i, :, 3] = h

    dropped = np.stack([_dropout_mask(rng, config)
                        for _ in range(config.n_faces)])

    detections: list[Detection] = []
    labels: list[int] = []
    truth: list[GroundTruthBox] = []
    for f in range(config.n_frames):
        for i in range(config.n_faces):
            x, y, w, h = geometry[i, f]
            box = BoundingBox(float(x), float(y), float(w), float(h))
            truth.append(GroundTruthBox(
                frame=f, identity=i, box=box,
                must_blur=i not in config.exempt))
            if dropped[i, f]:
                if rng.random() < config.proposal_rate:
                    jitter = rng.normal(0.0, 4.0, size=2)
                    scale = rng.uniform(0.9, 1.15)
                    pw, ph = w * scale, h * scale
                    pbox = BoundingBox(
                        float(x + jitter[0] + (w - pw) / 2.0),
                        float(y + jitter[1] + (h - ph) / 2.0),
                        float(pw), float(ph))
                    detections.append(Detection(
                        frame=f, box=pbox,
                        confidence=float(rng.uniform(0.3, 0.5)),
                        embedding=_noisy_embedding(
                            rng, basis[i], config.embedding_noise * 3.0),
                        source="proposal"))
                    labels.append(i)
            else:
                detections.append(Detection(
                    frame=f, box=box,
                    confidence=float(rng.uniform(0.85, 0.99)),
                    embedding=_noisy_embedding(
                        rng, basis[i], config.embedding_noise),
                    source="detector"))
                labels.append(i)
        if rng.random() < config.p_fp:
            side = rng.uniform(config.box_size[0], config.box_size[1])
            sx = rng.uniform(0.0, config.width - side)
            sy = rng.uniform(0.0, config.height - side)
            detections.append(Detection(
                frame=f, box=BoundingBox(float(sx), float(sy),
                                         float(side), float(side)),
                confidence=float(rng.uniform(0.3, 0.6)),
                embedding=_off_manifold_embedding(rng, basis),
                source="detector"))
            labels.append(-1)

    return SynthScene(header=header, detections=detections, truth=truth,
                      identity_embeddings=basis, labels=labels,
                      face_colors=colors, geometry=geometry)


# ---------------------------------------------------------------------------
# Rendering (optional, for demos and external detectors)
# ---------------------------------------------------------------------------

def render_frame(scene: SynthScene, frame: int,
                 noise_seed: Optional[int] = None) -> np.ndarray:
    """Draw one frame: dark gradient backdrop, bright elliptical faces with
    eye dots so blurring has visible texture to destroy."""
    h, w = scene.header.height, scene.header.width
    yy = np.linspace(30.0, 60.0, h)[:, None]
    img = np.repeat(yy, w, axis=1)[:, :, None] * np.ones((1, 1, 3))
    img[:, :, 2] += 8.0
    if noise_seed is not None:
        nrng = np.random.default_rng(noise_seed)
        img += nrng.normal(0.0, 2.0, size=img.shape)

    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    for i in range(scene.geometry.shape[0]):
        x, y, bw, bh = scene.geometry[i, frame]
        cx, cy = x + bw / 2.0, y + bh / 2.0
        rx, ry = bw / 2.0, bh / 2.0
        mask = ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0
        color = scene.face_colors[i]
        for c in range(3):
            img[:, :, c][mask] = color[c]
        for ex in (cx - rx * 0.4, cx + rx * 0.4):
            eye = (xs - ex) ** 2 + (ys - (cy - ry * 0.25)) ** 2 <= (rx * 0.12) ** 2
            for c in range(3):
                img[:, :, c][eye] = 20.0
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)
