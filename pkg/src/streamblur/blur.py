"""Irreversible face masking: Gaussian mosaic or block averaging inside box
regions, plus the applied-mask log format.

Blur sampling is confined to the masked rectangle (edge-clamped at its
borders), so no pixel outside a mask region influences or is influenced by
the anonymization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._kernels import separable_blur
from .core import BoundingBox

SIGMA_DIVISOR = 6.0
DEFAULT_BLOCK = 16
MODES = ("gaussian", "blocks")


@dataclass(frozen=True)
class AppliedMask:
    """Pixel rectangle actually masked for one cluster in one frame."""

    frame: int
    cluster: int
    x: int
    y: int
    w: int
    h: int


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3 sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    u = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(u * u) / (2.0 * sigma * sigma))
    return k / k.sum()


def _pixel_rect(box: BoundingBox, width: int, height: int,
                margin: float = 0.0):
    """Integer rectangle covering ``box`` (optionally grown by ``margin``
    of each side length), clamped to the image; None when nothing remains."""
    x, y, w, h = box.x, box.y, box.w, box.h
    if margin:
        x -= margin * w
        y -= margin * h
        w *= 1.0 + 2.0 * margin
        h *= 1.0 + 2.0 * margin
    x0 = max(0, math.floor(x))
    y0 = max(0, math.floor(y))
    x1 = min(width, math.ceil(x + w))
    y1 = min(height, math.ceil(y + h))
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1, y1


def blur_region(image: np.ndarray, rect, sigma: float):
    """Gaussian-blur ``rect`` of a (H, W, 3) uint8 image in place."""
    x0, y0, x1, y1 = rect
    kernel = gaussian_kernel(sigma)
    region = image[y0:y1, x0:x1].astype(np.float64)
    blurred = separable_blur(region, kernel)
    image[y0:y1, x0:x1] = np.clip(np.rint(blurred), 0, 255).astype(np.uint8)


def block_region(image: np.ndarray, rect, block: int):
    """Replace ``rect`` with per-block mean colors, in place."""
    if block < 1:
        raise ValueError("block size must be >= 1")
    x0, y0, x1, y1 = rect
    for by in range(y0, y1, block):
        for bx in range(x0, x1, block):
            cell = image[by:min(by + block, y1), bx:min(bx + block, x1)]
            mean = np.clip(np.rint(cell.reshape(-1, 3).mean(axis=0)), 0, 255)
            cell[:] = mean.astype(np.uint8)


def _planned(frame: int, boxes, width: int, height: int, margin: float):
    """(cluster, box, rect) triples in ascending cluster order, off-frame
    boxes skipped."""
    for cluster, box in sorted(boxes, key=lambda cb: cb[0]):
        rect = _pixel_rect(box, width, height, margin)
        if rect is not None:
            yield cluster, box, rect


def plan_masks(frame: int, boxes: Sequence[tuple[int, BoundingBox]],
               width: int, height: int,
               margin: float = 0.0) -> list[AppliedMask]:
    """The applied-mask log one frame would produce, without touching pixels.

    Follows the same ordering, growth and clamping rules as apply_masks, so
    the log can be written for streams that carry no frame data.
    """
    return [AppliedMask(frame=frame, cluster=cluster, x=r[0], y=r[1],
                        w=r[2] - r[0], h=r[3] - r[1])
            for cluster, _, r in _planned(frame, boxes, width, height, margin)]


def apply_masks(image: np.ndarray, frame: int,
                boxes: Sequence[tuple[int, BoundingBox]],
                mode: str = "gaussian", sigma: float | None = None,
                block: int = DEFAULT_BLOCK,
                margin: float = 0.0) -> list[AppliedMask]:
    """Mask every (cluster, box) on one frame; returns the applied log.

    Boxes are processed in ascending cluster order; fully off-frame boxes
    apply nothing and are not logged.  ``sigma=None`` derives the blur width
    from each box as max(w, h) / 6.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mask mode {mode!r}")
    h_img, w_img = image.shape[:2]
    applied = []
    for cluster, box, rect in _planned(frame, boxes, w_img, h_img, margin):
        if mode == "gaussian":
            s = sigma if sigma is not None else max(box.w, box.h) / SIGMA_DIVISOR
            blur_region(image, rect, s)
        else:
            block_region(image, rect, block)
        x0, y0, x1, y1 = rect
        applied.append(AppliedMask(frame=frame, cluster=cluster,
                                   x=x0, y=y0, w=x1 - x0, h=y1 - y0))
    return applied


# ---------------------------------------------------------------------------
# Mask log wire format
# ---------------------------------------------------------------------------

def mask_line(m: AppliedMask) -> str:
    return json.dumps({"frame": m.frame, "cluster": m.cluster,
                       "box": [m.x, m.y, m.w, m.h]}, separators=(",", ":"))


def write_mask_log(path, masks: Iterable[AppliedMask]):
    ordered = sorted(masks, key=lambda m: (m.frame, m.cluster))
    with open(path, "w", encoding="utf-8") as fh:
        for m in ordered:
            fh.write(mask_line(m) + "\n")


def read_mask_log(path) -> list[AppliedMask]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            x, y, w, h = obj["box"]
            out.append(AppliedMask(frame=int(obj["frame"]),
                                   cluster=int(obj["cluster"]),
                                   x=int(x), y=int(y), w=int(w), h=int(h)))
    return out
