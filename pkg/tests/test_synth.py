import math

import numpy as np
import pytest

from streamblur.core import detection_line, header_line
from streamblur.metrics import ground_truth_line
from streamblur.synth import SceneConfig, generate, render_frame

SMALL = SceneConfig(n_faces=3, n_frames=400, width=1280, height=720,
                    embedding_dim=16)


def serialize(scene):
    lines = [header_line(scene.header)]
    lines += [detection_line(d) for d in scene.detections]
    lines += [ground_truth_line(t) for t in scene.truth]
    return "\n".join(lines)


class TestDeterminism:
    def test_same_seed_same_bytes(self):
        a = generate(SMALL, seed=901)
        b = generate(SMALL, seed=901)
        assert serialize(a) == serialize(b)
        assert a.labels == b.labels

    def test_different_seed_differs(self):
        a = generate(SMALL, seed=901)
        b = generate(SMALL, seed=902)
        assert serialize(a) != serialize(b)


class TestSeparation:
    def test_anchor_centers_stay_apart(self):
        scene = generate(SMALL, seed=11)
        diag = math.hypot(SMALL.width, SMALL.height)
        centers = scene.geometry[:, :, :2] + scene.geometry[:, :, 2:] / 2.0
        for i in range(SMALL.n_faces):
            for j in range(i + 1, SMALL.n_faces):
                d = np.hypot(*(centers[i] - centers[j]).T)
                assert d.min() >= 0.25 * diag

    def test_embedding_cosines(self):
        scene = generate(SMALL, seed=12)
        by_id = {}
        for det, lab in zip(scene.detections, scene.labels):
            if lab >= 0 and det.source == "detector":
                by_id.setdefault(lab, []).append(det.embedding)
        for lab, embs in by_id.items():
            e = np.stack(embs)
            within = e @ e.T
            assert within.min() >= 0.9
        for a in range(SMALL.n_faces):
            for b in range(a + 1, SMALL.n_faces):
                cross = np.stack(by_id[a]) @ np.stack(by_id[b]).T
                assert np.abs(cross).max() <= 0.2

    def test_boxes_inside_frame(self):
        scene = generate(SMALL, seed=13)
        g = scene.geometry
        assert g[:, :, 0].min() >= 0 and g[:, :, 1].min() >= 0
        assert (g[:, :, 0] + g[:, :, 2]).max() <= SMALL.width
        assert (g[:, :, 1] + g[:, :, 3]).max() <= SMALL.height


class TestDropouts:
    def test_rate_near_target(self):
        cfg = SceneConfig(n_faces=3, n_frames=3000)
        scene = generate(cfg, seed=21)
        detected = sum(1 for d, l in zip(scene.detections, scene.labels)
                       if l >= 0 and d.source == "detector")
        total = cfg.n_faces * cfg.n_frames
        rate = 1.0 - detected / total
        assert 0.03 <= rate <= 0.07

    def test_bursts_exist(self):
        cfg = SceneConfig(n_faces=1, n_frames=3000)
        scene = generate(cfg, seed=22)
        have = {d.frame for d, l in zip(scene.detections, scene.labels)
                if l == 0 and d.source == "detector"}
        longest = run = 0
        for f in range(cfg.n_frames):
            run = 0 if f in have else run + 1
            longest = max(longest, run)
        assert longest >= cfg.burst_frames[0]

    def test_endpoints_always_detected(self):
        cfg = SceneConfig(n_faces=3, n_frames=500)
        for seed in range(5):
            scene = generate(cfg, seed=seed)
            for i in range(cfg.n_faces):
                frames = {d.frame for d, l in zip(scene.detections, scene.labels)
                          if l == i and d.source == "detector"}
                assert 0 in frames and cfg.n_frames - 1 in frames

    def test_proposals_only_in_dropped_frames(self):
        scene = generate(SceneConfig(n_faces=2, n_frames=2000), seed=23)
        detector_at = {(l, d.frame)
                       for d, l in zip(scene.detections, scene.labels)
                       if d.source == "detector" and l >= 0}
        proposals = [(l, d) for d, l in zip(scene.detections, scene.labels)
                     if d.source == "proposal"]
        assert proposals, "expected some proposals at this dropout rate"
        for lab, det in proposals:
            assert (lab, det.frame) not in detector_at
            assert 0.3 <= det.confidence <= 0.5


class TestSpurious:
    def test_off_manifold_and_low_confidence(self):
        cfg = SceneConfig(n_faces=3, n_frames=3000)
        scene = generate(cfg, seed=31)
        spurious = [d for d, l in zip(scene.detections, scene.labels) if l < 0]
        assert spurious, "expected spurious detections at p_fp=0.02"
        basis = scene.identity_embeddings
        for det in spurious:
            assert np.abs(basis @ det.embedding).max() < 0.3
            assert 0.3 <= det.confidence <= 0.6
            assert det.source == "detector"

    def test_rate_near_target(self):
        cfg = SceneConfig(n_faces=3, n_frames=5000)
        scene = generate(cfg, seed=32)
        n_spurious = sum(1 for l in scene.labels if l < 0)
        expect = cfg.n_frames * cfg.p_fp
        sigma = math.sqrt(cfg.n_frames * cfg.p_fp * (1 - cfg.p_fp))
        assert abs(n_spurious - expect) <= 4 * sigma


class TestGroundTruth:
    def test_every_face_every_frame(self):
        cfg = SceneConfig(n_faces=2, n_frames=50)
        scene = generate(cfg, seed=41)
        assert len(scene.truth) == 100
        seen = {(t.frame, t.identity) for t in scene.truth}
        assert len(seen) == 100

    def test_exempt_flag(self):
        cfg = SceneConfig(n_faces=3, n_frames=20, exempt=(1,))
        scene = generate(cfg, seed=42)
        for t in scene.truth:
            assert t.must_blur == (t.identity != 1)


class TestValidation:
    def test_too_many_faces_for_frame(self):
        with pytest.raises(ValueError):
            generate(SceneConfig(n_faces=40, n_frames=10,
                                 embedding_dim=64), seed=1)

    def test_bad_rates(self):
        with pytest.raises(ValueError):
            SceneConfig(p_fn=1.5)

    def test_embedding_dim_floor(self):
        with pytest.raises(ValueError):
            SceneConfig(n_faces=8, embedding_dim=8)


class TestRendering:
    def test_frame_shape_and_texture(self):
        cfg = SceneConfig(n_faces=2, n_frames=5, width=320, height=240,
                          box_size=(20.0, 28.0), wiggle=5.0)
        scene = generate(cfg, seed=51)
        img = render_frame(scene, 0)
        assert img.shape == (240, 320, 3) and img.dtype == np.uint8
        # faces are bright against the dark backdrop
        x, y, w, h = scene.geometry[0, 0]
        cx, cy = int(x + w / 2), int(y + h / 2)
        assert img[cy, cx].mean() > 100
        assert img[5, 5].mean() < 80

    def test_render_deterministic(self):
        cfg = SceneConfig(n_faces=1, n_frames=3, width=160, height=120,
                          box_size=(20.0, 28.0), wiggle=5.0)
        scene = generate(cfg, seed=52)
        a = render_frame(scene, 1, noise_seed=7)
        b = render_frame(scene, 1, noise_seed=7)
        assert np.array_equal(a, b)
