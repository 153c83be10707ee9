"""Domain types, detection-stream wire format, and fixed-length segmentation.

Wire format is line-delimited JSON (UTF-8, one object per line).  A stream is
one header line followed by detection lines in nondecreasing frame order:

    {"type":"header","fps":30,"width":1280,"height":720,"embedding_dim":128,"quality_scale":1.0}
    {"type":"det","frame":0,"box":[x,y,w,h],"conf":0.99,"emb":[...],"source":"detector"}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

import numpy as np

SOURCES = ("detector", "proposal", "gp")
DEFAULT_EMBEDDING_DIM = 128
DEFAULT_SEGMENT_LEN = 90


class StreamFormatError(ValueError):
    """Base for wire-format failures; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParseError(StreamFormatError):
    """Record is not valid JSON or lacks required fields."""


class SchemaError(StreamFormatError):
    """Record violates a declared field contract (length, range, enum)."""


class OrderingError(StreamFormatError):
    """Detection frames regressed within the stream."""


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box sides must be positive, got w={self.w} h={self.h}")
        if not (np.isfinite(self.x) and np.isfinite(self.y)
                and np.isfinite(self.w) and np.isfinite(self.h)):
            raise ValueError("box coordinates must be finite")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


@dataclass(frozen=True, eq=False)
class Detection:
    frame: int
    box: BoundingBox
    confidence: float
    embedding: np.ndarray
    source: str = "detector"

    def __post_init__(self):
        if self.frame < 0:
            raise ValueError(f"frame must be non-negative, got {self.frame}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        emb = np.asarray(self.embedding, dtype=np.float64)
        emb.flags.writeable = False
        object.__setattr__(self, "embedding", emb)


@dataclass(frozen=True)
class StreamHeader:
    fps: float
    width: int
    height: int
    embedding_dim: int = DEFAULT_EMBEDDING_DIM
    quality_scale: float = 1.0

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")
        if self.quality_scale <= 0:
            raise ValueError("quality_scale must be positive")

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))


@dataclass(frozen=True)
class Segment:
    """Contiguous frame window [start, end) and the detections inside it."""

    index: int
    start: int
    end: int
    detections: tuple[Detection, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError("segment frame range is empty")

    @property
    def n_frames(self) -> int:
        return self.end - self.start


# ---------------------------------------------------------------------------
# Parsing / serialization
# ---------------------------------------------------------------------------

def _decode_line(raw: bytes | str, lineno: int) -> dict:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", lineno) from exc
    if not isinstance(obj, dict) or "type" not in obj:
        raise ParseError("record must be an object with a 'type' field", lineno)
    return obj


def _parse_header(obj: dict, lineno: int) -> StreamHeader:
    try:
        return StreamHeader(
            fps=float(obj["fps"]),
            width=int(obj["width"]),
            height=int(obj["height"]),
            embedding_dim=int(obj.get("embedding_dim", DEFAULT_EMBEDDING_DIM)),
            quality_scale=float(obj.get("quality_scale", 1.0)),
        )
    except KeyError as exc:
        raise ParseError(f"header missing field {exc.args[0]!r}", lineno) from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad header: {exc}", lineno) from exc


def _parse_detection(obj: dict, embedding_dim: int, lineno: int) -> Detection:
    try:
        box_vals = obj["box"]
        frame = int(obj["frame"])
        conf = float(obj["conf"])
        emb = obj["emb"]
        source = obj.get("source", "detector")
    except KeyError as exc:
        raise ParseError(f"detection missing field {exc.args[0]!r}", lineno) from exc
    if not isinstance(box_vals, (list, tuple)) or len(box_vals) != 4:
        raise ParseError("box must be [x, y, w, h]", lineno)
    if not isinstance(emb, (list, tuple)):
        raise ParseError("emb must be an array", lineno)
    if len(emb) != embedding_dim:
        raise SchemaError(
            f"embedding length {len(emb)} != declared dimension {embedding_dim}", lineno)
    try:
        box = BoundingBox(*(float(v) for v in box_vals))
        return Detection(frame=frame, box=box, confidence=conf,
                         embedding=np.asarray(emb, dtype=np.float64), source=source)
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc), lineno) from exc


def parse_stream(stream: IO[bytes] | Iterable[bytes | str]) -> tuple[StreamHeader, Iterator[Detection]]:
    """Parse a detection stream.

    Returns the header plus a lazy detection iterator.  The iterator raises
    :class:`ParseError` / :class:`SchemaError` / :class:`OrderingError` with
    the offending 1-based line number.
    """
    lines = iter(enumerate(stream, start=1))
    for lineno, raw in lines:
        if not raw.strip():
            continue
        obj = _decode_line(raw, lineno)
        if obj["type"] != "header":
            raise ParseError("first record must be the stream header", lineno)
        header = _parse_header(obj, lineno)
        break
    else:
        raise ParseError("empty stream: header record missing", 0)

    def detections() -> Iterator[Detection]:
        last_frame = -1
        for lineno, raw in lines:
            if not raw.strip():
                continue
            obj = _decode_line(raw, lineno)
            kind = obj["type"]
            if kind == "header":
                raise ParseError("duplicate header record", lineno)
            if kind != "det":
                raise ParseError(f"unknown record type {kind!r}", lineno)
            det = _parse_detection(obj, header.embedding_dim, lineno)
            if det.frame < last_frame:
                raise OrderingError(
                    f"frame {det.frame} after frame {last_frame}", lineno)
            last_frame = det.frame
            yield det

    return header, detections()


def header_line(header: StreamHeader) -> str:
    return json.dumps({
        "type": "header",
        "fps": header.fps,
        "width": header.width,
        "height": header.height,
        "embedding_dim": header.embedding_dim,
        "quality_scale": header.quality_scale,
    }, separators=(",", ":"))


def detection_line(det: Detection) -> str:
    return json.dumps({
        "type": "det",
        "frame": det.frame,
        "box": det.box.as_list(),
        "conf": det.confidence,
        "emb": [float(v) for v in det.embedding],
        "source": det.source,
    }, separators=(",", ":"))


def write_stream(path, header: StreamHeader, detections: Iterable[Detection]):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header_line(header) + "\n")
        for det in detections:
            fh.write(detection_line(det) + "\n")


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

def segment_stream(detections: Iterable[Detection],
                   segment_len: int = DEFAULT_SEGMENT_LEN) -> Iterator[Segment]:
    """Split a frame-ordered detection sequence into fixed windows.

    Segment k covers frames [k*L, (k+1)*L); the final segment is truncated at
    the last observed frame.  Windows with no detections are still emitted so
    downstream gap handling sees the full frame range.
    """
    if segment_len < 1:
        raise ValueError("segment_len must be >= 1")
    pending: list[Detection] = []
    seg_idx = 0
    for det in detections:
        while det.frame >= (seg_idx + 1) * segment_len:
            yield Segment(seg_idx, seg_idx * segment_len,
                          (seg_idx + 1) * segment_len, tuple(pending))
            pending = []
            seg_idx += 1
        pending.append(det)
    if pending:
        last_frame = pending[-1].frame
        end = min((seg_idx + 1) * segment_len, last_frame + 1)
        yield Segment(seg_idx, seg_idx * segment_len, end, tuple(pending))
