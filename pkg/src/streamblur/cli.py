"""Command line front end: run, synth, eval, bench.

Options for ``run`` resolve in three layers: built-in defaults, then a
``key = value`` config file, then explicit command line flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .blur import apply_masks
from .core import StreamFormatError, parse_stream, write_stream
from .frames import frame_path, list_frames, read_ppm, write_ppm
from .metrics import (evaluate_masks, read_ground_truth,
                      weighted_cluster_purity, write_ground_truth)
from .pipeline import (PipelineConfig, load_references, run as run_pipeline,
                       write_artifacts)
from .blur import read_mask_log

EXIT_USAGE = 2

# config keys accepted in the file and their coercions
_CONFIG_FIELDS = {
    "segment_len": int, "window": int, "min_support": int,
    "min_density": float, "alpha": float, "mode": str, "sigma": float,
    "block": int, "margin": float, "damping": float,
    "literal_similarity": bool, "exempt_threshold": float,
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _require_file(path, what: str):
    if not os.path.isfile(path):
        raise CliError(f"{what} not found: {path}")


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; unknown keys rejected."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in _CONFIG_FIELDS:
                raise CliError(f"{path}:{lineno}: unknown option {key!r}")
            cast = _CONFIG_FIELDS[key]
            try:
                values[key] = _parse_bool(val) if cast is bool else cast(val)
            except ValueError as exc:
                raise CliError(f"{path}:{lineno}: {exc}") from None
    return values


def _build_config(args) -> PipelineConfig:
    values: dict = {}
    if args.config is not None:
        _require_file(args.config, "config file")
        values.update(parse_config_file(args.config))
    overrides = {
        "segment_len": args.segment_len, "window": args.window,
        "min_support": args.min_support, "min_density": args.min_density,
        "alpha": args.alpha, "mode": args.mode, "sigma": args.sigma,
        "block": args.block, "margin": args.box_margin,
        "damping": args.damping, "exempt_threshold": args.exempt_threshold,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if args.literal_similarity:
        values["literal_similarity"] = True
    try:
        return PipelineConfig(**values)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _cmd_run(args) -> int:
    _require_file(args.input, "input stream")
    config = _build_config(args)
    references = None
    if args.exempt_ref is not None:
        _require_file(args.exempt_ref, "reference file")
        references = load_references(args.exempt_ref)

    with open(args.input, "r", encoding="utf-8") as fh:
        try:
            header, detections = parse_stream(fh)
            result = run_pipeline(header, detections, config, references)
        except StreamFormatError as exc:
            raise CliError(f"{args.input}: {exc}") from None

    write_artifacts(result, args.out)

    if args.frames_dir is not None:
        if not os.path.isdir(args.frames_dir):
            raise CliError(f"frames directory not found: {args.frames_dir}")
        out_frames = args.frames_out or os.path.join(args.out, "frames")
        os.makedirs(out_frames, exist_ok=True)
        by_frame: dict[int, list] = {}
        for traj in result.trajectories:
            if traj.cluster in result.exempt:
                continue
            for s in traj.samples:
                by_frame.setdefault(s.frame, []).append((traj.cluster, s.box))
        for index, path in list_frames(args.frames_dir):
            img = read_ppm(path)
            apply_masks(img, index, by_frame.get(index, ()),
                        mode=config.mode, sigma=config.sigma,
                        block=config.block, margin=config.margin)
            write_ppm(frame_path(out_frames, index), img)

    if not args.quiet:
        print(json.dumps({
            "trajectories": len(result.trajectories),
            "masks": len(result.masks),
            "exempt": sorted(result.exempt),
            "out": args.out,
        }))
    return 0


def _cmd_synth(args) -> int:
    from .synth import SceneConfig, generate, render_frame

    exempt = ()
    if args.exempt:
        exempt = tuple(int(v) for v in args.exempt.split(",") if v != "")
    try:
        cfg = SceneConfig(
            n_faces=args.faces, n_frames=args.frames, fps=args.fps,
            width=args.width, height=args.height, embedding_dim=args.dim,
            p_fn=args.p_fn, p_fp=args.p_fp, exempt=exempt)
        scene = generate(cfg, seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from None

    write_stream(args.out, scene.header, scene.detections)
    if args.gt is not None:
        write_ground_truth(args.gt, scene.truth)
    if args.render_dir is not None:
        os.makedirs(args.render_dir, exist_ok=True)
        for f in range(cfg.n_frames):
            img = render_frame(scene, f, noise_seed=args.seed * 100003 + f)
            write_ppm(frame_path(args.render_dir, f), img)
    if not args.quiet:
        print(json.dumps({"detections": len(scene.detections),
                          "frames": cfg.n_frames, "out": args.out}))
    return 0


def _cmd_eval(args) -> int:
    _require_file(args.masks, "mask log")
    _require_file(args.gt, "ground truth")
    masks = read_mask_log(args.masks)
    truth = read_ground_truth(args.gt)
    rep = evaluate_masks(masks, truth, threshold=args.iou)
    print(json.dumps({
        "precision": rep.precision,
        "recall": rep.recall,
        "weighted_purity": weighted_cluster_purity(rep.purity_pairs),
        "clusters": sorted(rep.clusters),
        "true_positives": rep.true_positives,
        "false_positives": rep.false_positives,
        "false_negatives": rep.false_negatives,
    }, indent=2))
    return 0


def _cmd_bench(args) -> int:
    from .bench import format_report, run_bench

    sizes = tuple(int(v) for v in args.sizes.split(","))
    report = run_bench(sizes=sizes, repeats=args.repeats, seed=args.seed)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(format_report(report))
    return 0


def _add_run_parser(sub):
    p = sub.add_parser("run", help="process a detection stream")
    p.add_argument("--input", required=True, help="detection stream (jsonl)")
    p.add_argument("--out", required=True, help="artifact directory")
    p.add_argument("--config", help="key = value option file")
    p.add_argument("--frames-dir", help="input frames (frame_NNNNNN.ppm)")
    p.add_argument("--frames-out", help="masked frame output directory")
    p.add_argument("--exempt-ref",
                   help="jsonl of reference embeddings to leave unmasked")
    p.add_argument("--segment-len", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--min-support", type=int)
    p.add_argument("--min-density", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", choices=("gaussian", "blocks"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--block", type=int)
    p.add_argument("--box-margin", type=float)
    p.add_argument("--damping", type=float)
    p.add_argument("--exempt-threshold", type=float)
    p.add_argument("--literal-similarity", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_run)


def _add_synth_parser(sub):
    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--out", required=True, help="detection stream output")
    p.add_argument("--gt", help="ground truth output (jsonl)")
    p.add_argument("--render-dir", help="write rendered ppm frames here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--faces", type=int, default=3)
    p.add_argument("--frames", type=int, default=3000)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--width", type=int, default=1280)
    p.add_argument("--height", type=int, default=720)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--p-fn", type=float, default=0.05)
    p.add_argument("--p-fp", type=float, default=0.02)
    p.add_argument("--exempt", help="comma-separated identity ids")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_synth)


def _add_eval_parser(sub):
    p = sub.add_parser("eval", help="score a mask log against ground truth")
    p.add_argument("--masks", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.set_defaults(func=_cmd_eval)


def _add_bench_parser(sub):
    p = sub.add_parser("bench", help="time the hot kernels on both paths")
    p.add_argument("--sizes", default="256,512,910")
    p.add_argument("--repeats", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bench)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="streamblur",
        description="streaming face anonymization over detection streams")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)
    _add_synth_parser(sub)
    _add_eval_parser(sub)
    _add_bench_parser(sub)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"streamblur: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
