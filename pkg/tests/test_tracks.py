"""Trajectory assembly, duplicate handling, gap runs, pruning, round-trip."""

import pytest

from streamblur.tracks import (
    Sample,
    Trajectory,
    assemble,
    prune_unstable,
    read_trajectories,
    trajectory_line,
    write_trajectories,
)
from streamblur.core import BoundingBox
from conftest import make_detection


def boxed(frame, x, conf=0.9, source="detector"):
    return make_detection(frame, x, 50.0, [1.0, 0.0], confidence=conf,
                          source=source)


class TestAssemble:
    def test_groups_by_label_sorted(self):
        dets = [boxed(0, 10), boxed(0, 200), boxed(1, 11), boxed(1, 201)]
        trajs = assemble(dets, [7, 2, 7, 2])
        assert [t.cluster for t in trajs] == [2, 7]
        assert trajs[0].frames() == [0, 1]
        assert trajs[1].frames() == [0, 1]
        assert trajs[1].samples[0].box.x == 10

    def test_duplicate_frame_keeps_highest_confidence(self):
        dets = [boxed(3, 10, conf=0.8), boxed(3, 14, conf=0.95),
                boxed(3, 12, conf=0.6)]
        trajs = assemble(dets, [0, 0, 0])
        assert trajs[0].n_samples == 1
        assert trajs[0].samples[0].box.x == 14

    def test_duplicate_tie_keeps_first(self):
        dets = [boxed(3, 10, conf=0.8), boxed(3, 14, conf=0.8)]
        trajs = assemble(dets, [0, 0])
        assert trajs[0].samples[0].box.x == 10

    def test_source_carried_through(self):
        dets = [boxed(0, 10, source="proposal")]
        trajs = assemble(dets, [0])
        assert trajs[0].samples[0].source == "proposal"

    def test_label_length_mismatch(self):
        with pytest.raises(ValueError):
            assemble([boxed(0, 10)], [0, 1])

    def test_empty_input(self):
        assert assemble([], []) == []


class TestTrajectoryShape:
    def test_span_and_density(self):
        t = Trajectory(0, [Sample(2, BoundingBox(0, 0, 5, 5)),
                           Sample(4, BoundingBox(0, 0, 5, 5)),
                           Sample(11, BoundingBox(0, 0, 5, 5))])
        assert t.span == (2, 11)
        assert t.density == pytest.approx(3 / 10)

    def test_gap_runs(self):
        frames = [0, 1, 2, 6, 7, 10]
        t = Trajectory(0, [Sample(f, BoundingBox(0, 0, 5, 5)) for f in frames])
        assert t.gap_runs() == [(3, 5), (8, 9)]

    def test_no_gaps_when_contiguous(self):
        t = Trajectory(0, [Sample(f, BoundingBox(0, 0, 5, 5)) for f in range(4)])
        assert t.gap_runs() == []

    def test_single_sample(self):
        t = Trajectory(0, [Sample(5, BoundingBox(0, 0, 5, 5))])
        assert t.span == (5, 5)
        assert t.density == 1.0
        assert t.gap_runs() == []

    def test_empty_span_raises(self):
        with pytest.raises(ValueError):
            Trajectory(0).span

    def test_sample_source_validated(self):
        with pytest.raises(ValueError):
            Sample(0, BoundingBox(0, 0, 5, 5), source="tracker")


class TestPrune:
    def make(self, frames):
        return Trajectory(0, [Sample(f, BoundingBox(0, 0, 5, 5))
                              for f in frames])

    def test_short_trajectory_dropped(self):
        kept = prune_unstable([self.make(range(4)), self.make(range(5))])
        assert len(kept) == 1
        assert kept[0].n_samples == 5

    def test_sparse_trajectory_dropped(self):
        sparse = self.make(range(0, 100, 10))  # 10 samples over 91 frames
        dense = self.make(range(10))
        kept = prune_unstable([sparse, dense])
        assert kept == [dense]

    def test_density_boundary_inclusive(self):
        # 6 samples spanning 20 frames: density exactly 0.3
        t = self.make([0, 4, 8, 12, 16, 19])
        assert t.density == pytest.approx(0.3)
        assert prune_unstable([t]) == [t]


class TestWire:
    def test_line_layout(self):
        t = Trajectory(3, [Sample(7, BoundingBox(1.0, 2.0, 3.0, 4.0), "gp")])
        assert trajectory_line(t) == \
            '{"cluster":3,"span":[7,7],"samples":[[7,1.0,2.0,3.0,4.0,"gp"]]}'

    def test_round_trip(self, rng, tmp_path):
        trajs = []
        for k in range(3):
            frames = sorted(rng.choice(200, size=20, replace=False))
            trajs.append(Trajectory(k, [
                Sample(int(f), BoundingBox(float(rng.uniform(0, 100)),
                                           float(rng.uniform(0, 100)),
                                           float(rng.uniform(1, 50)),
                                           float(rng.uniform(1, 50))),
                       ("detector", "proposal", "gp")[int(rng.integers(3))])
                for f in frames]))
        path = tmp_path / "trajectories.jsonl"
        write_trajectories(path, trajs)
        back = read_trajectories(path)
        assert back == trajs

    def test_span_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"cluster":0,"span":[0,9],'
                        '"samples":[[7,1.0,2.0,3.0,4.0,"gp"]]}\n')
        with pytest.raises(ValueError):
            read_trajectories(path)
