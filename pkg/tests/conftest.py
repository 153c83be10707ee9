"""Shared fixtures: deterministic detection factories and stream builders."""

from __future__ import annotations

import numpy as np
import pytest

from streamblur.core import BoundingBox, Detection, StreamHeader


def make_detection(frame, x, y, embedding, w=32.0, h=32.0, confidence=0.9,
                   source="detector"):
    return Detection(frame=frame, box=BoundingBox(x, y, w, h),
                     confidence=confidence, source=source,
                     embedding=np.asarray(embedding, dtype=np.float64))


def make_header(fps=30.0, width=400, height=300, embedding_dim=4,
                quality_scale=1.0):
    return StreamHeader(fps=fps, width=width, height=height,
                        embedding_dim=embedding_dim,
                        quality_scale=quality_scale)


def identity_embeddings(rng, n_ids, dim):
    """Rows of a random orthogonal matrix: unit norm, mutually orthogonal."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q[:n_ids]


def separated_stream(rng, n_faces=3, n_frames=40, dim=16, width=1280,
                     height=720, wiggle=8.0, noise=0.04, drop=0.0):
    """Detections for well-separated identities wiggling around fixed anchors.

    Anchor spacing is at least a quarter of the frame diagonal and the wiggle
    is small, so spatial separation holds at every frame; embedding noise is
    mild enough that same-identity cosine stays high.
    """
    hdr = StreamHeader(fps=30.0, width=width, height=height, embedding_dim=dim)
    gap = 0.30 * hdr.diagonal
    anchors = []
    for k in range(n_faces):
        ax = 100.0 + (k % 3) * gap
        ay = 100.0 + (k // 3) * gap
        anchors.append((ax, ay))
    ids = identity_embeddings(rng, n_faces, dim)
    dets = []
    labels = []
    for f in range(n_frames):
        for k in range(n_faces):
            if drop > 0.0 and rng.random() < drop:
                continue
            ax, ay = anchors[k]
            cx = ax + wiggle * np.sin(2 * np.pi * f / 30.0 + k)
            cy = ay + wiggle * np.cos(2 * np.pi * f / 37.0 + 2 * k)
            emb = ids[k] + rng.normal(scale=noise, size=dim)
            dets.append(make_detection(f, cx - 16.0, cy - 16.0, emb))
            labels.append(k)
    return hdr, dets, labels


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
