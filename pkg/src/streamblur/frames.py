"""Binary PPM (P6) frame IO and frame-directory conventions.

Frames live in a flat directory as ``frame_000123.ppm``.  P6 is the only
supported format: trivial to parse, lossless, and produced by ffmpeg with
``-c:v ppm``.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np

FRAME_PATTERN = re.compile(r"^frame_(\d{6})\.ppm$")


def frame_path(directory, index: int) -> Path:
    if index < 0:
        raise ValueError("frame index must be non-negative")
    return Path(directory) / f"frame_{index:06d}.ppm"


def list_frames(directory) -> list[tuple[int, Path]]:
    """(index, path) pairs sorted by index."""
    out = []
    for name in os.listdir(directory):
        m = FRAME_PATTERN.match(name)
        if m:
            out.append((int(m.group(1)), Path(directory) / name))
    out.sort()
    return out


def _next_token(fh, path) -> bytes:
    """Whitespace-delimited header token, skipping # comments."""
    tok = b""
    while True:
        ch = fh.read(1)
        if not ch:
            raise ValueError(f"{path}: truncated header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = fh.read(1)
            continue
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch


def read_ppm(path) -> np.ndarray:
    """Load a P6 image as (H, W, 3) uint8."""
    with open(path, "rb") as fh:
        if fh.read(2) != b"P6":
            raise ValueError(f"{path}: not a binary PPM (P6) file")
        width = int(_next_token(fh, path))
        height = int(_next_token(fh, path))
        maxval = int(_next_token(fh, path))
        if maxval != 255:
            raise ValueError(f"{path}: unsupported maxval {maxval}")
        if width <= 0 or height <= 0:
            raise ValueError(f"{path}: bad dimensions {width}x{height}")
        data = fh.read(width * height * 3)
    if len(data) != width * height * 3:
        raise ValueError(f"{path}: pixel data truncated")
    # frombuffer views are read-only; masking edits frames in place
    return np.frombuffer(data, dtype=np.uint8).reshape(
        height, width, 3).copy()


def write_ppm(path, image: np.ndarray):
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("image must be (H, W, 3) uint8")
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(image.tobytes())
