"""Annotation backends: a uniform source of per-frame classifier scores
and object detections.

The pipeline never runs neural inference itself; it consumes annotations
from a precomputed file, from a synthetic scenario, or from any adapter
implementing the same ``annotate`` contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Protocol

from cricseg.frames import CropSpec, Frame, crop_offsets

OBJECT_LABELS = frozenset({"pitch", "umpire", "batsman", "bowler", "ball"})


class AnnotationError(Exception):
    """Backend failure for one frame; carries the frame index."""

    def __init__(self, frame_index: int, message: str) -> None:
        super().__init__(f"frame {frame_index}: {message}")
        self.frame_index = frame_index


class AnnotationLoadError(Exception):
    """Malformed annotation file; message names the offending line."""


@dataclass(frozen=True)
class Detection:
    """One detected object box in full-frame pixel coordinates.

    ``box`` is (x, y, w, h) with y measured from the top of the frame.
    """

    label: str
    box: tuple[float, float, float, float]
    confidence: float

    def __post_init__(self) -> None:
        if self.label not in OBJECT_LABELS:
            raise ValueError(f"unknown object label: {self.label!r}")
        x, y, w, h = self.box
        if w <= 0 or h <= 0:
            raise ValueError("detection box must have positive width and height")
        if x < 0 or y < 0:
            raise ValueError("detection box must lie inside the frame")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")

    @property
    def bottom_row(self) -> float:
        return self.box[1] + self.box[3]

    @property
    def height(self) -> float:
        return self.box[3]

    def center(self) -> tuple[float, float]:
        x, y, w, h = self.box
        return x + w / 2.0, y + h / 2.0


@dataclass(frozen=True)
class FrameAnnotations:
    """Classifier score plus detections for one frame."""

    frame_index: int
    front_prob: float
    detections: tuple[Detection, ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0.0 <= self.front_prob <= 1.0:
            raise ValueError("front_prob must be in [0, 1]")

    def best(self, label: str) -> Detection | None:
        """Highest-confidence detection with the given label, if any."""
        picked = None
        for det in self.detections:
            if det.label == label and (picked is None or det.confidence > picked.confidence):
                picked = det
        return picked

    def with_label(self, label: str) -> tuple[Detection, ...]:
        return tuple(d for d in self.detections if d.label == label)


class Backend(Protocol):
    """Anything that can annotate frames."""

    def annotate(self, frame: Frame) -> FrameAnnotations: ...


class MappingBackend:
    """Backend serving a fixed mapping of frame index to annotations.

    Pure function of (state, frame index): repeated calls return the same
    object, and concurrent calls for distinct frames are safe.
    """

    def __init__(self, records: dict[int, FrameAnnotations]) -> None:
        self._records = records

    def annotate(self, frame: Frame) -> FrameAnnotations:
        return self.by_index(frame.index)

    def by_index(self, index: int) -> FrameAnnotations:
        try:
            return self._records[index]
        except KeyError:
            raise AnnotationError(index, "no annotation record for frame") from None

    def frame_indices(self) -> list[int]:
        return sorted(self._records)


def _parse_detection(
    obj: dict,
    lineno: int,
    crop: CropSpec | None,
    frame_size: tuple[int, int] | None,
) -> Detection:
    try:
        label = obj["label"]
        x, y, w, h = (float(v) for v in obj["box"])
        conf = float(obj["conf"])
    except (KeyError, TypeError, ValueError) as exc:
        raise AnnotationLoadError(f"line {lineno}: malformed detection: {exc}") from exc
    space = obj.get("space", "full")
    if space == "cropped":
        if crop is None or frame_size is None:
            raise AnnotationLoadError(
                f"line {lineno}: cropped-space detection but no crop spec / frame size given"
            )
        dx, dy = crop_offsets(crop, *frame_size)
        x, y = x + dx, y + dy
    elif space != "full":
        raise AnnotationLoadError(f"line {lineno}: unknown coordinate space {space!r}")
    try:
        det = Detection(label, (x, y, w, h), conf)
    except ValueError as exc:
        raise AnnotationLoadError(f"line {lineno}: {exc}") from exc
    if frame_size is not None:
        fw, fh = frame_size
        if x + w > fw or y + h > fh:
            raise AnnotationLoadError(f"line {lineno}: detection box exceeds frame bounds")
    return det


def load_precomputed(
    path: str | Path,
    crop: CropSpec | None = None,
    frame_size: tuple[int, int] | None = None,
) -> MappingBackend:
    """Load a JSON Lines annotation file into a backend.

    One object per frame: {"frame": int, "front_prob": float,
    "detections": [{"label", "box": [x,y,w,h], "conf"}]}. Detections
    carrying "space": "cropped" are shifted back to full-frame
    coordinates, which requires ``crop`` and ``frame_size``.
    """
    records: dict[int, FrameAnnotations] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationLoadError(f"line {lineno}: invalid JSON: {exc}") from exc
            try:
                index = int(obj["frame"])
                front_prob = float(obj["front_prob"])
            except (KeyError, TypeError, ValueError) as exc:
                raise AnnotationLoadError(f"line {lineno}: malformed record: {exc}") from exc
            if index in records:
                raise AnnotationLoadError(f"line {lineno}: duplicate frame {index}")
            dets = tuple(
                _parse_detection(d, lineno, crop, frame_size)
                for d in obj.get("detections", [])
            )
            try:
                records[index] = FrameAnnotations(index, front_prob, dets)
            except ValueError as exc:
                raise AnnotationLoadError(f"line {lineno}: {exc}") from exc
    return MappingBackend(records)


def dump_annotations(annotations: Iterator[FrameAnnotations] | list[FrameAnnotations], path: str | Path) -> None:
    """Write annotations in the JSON Lines wire format."""
    with open(path, "w", encoding="utf-8") as fh:
        for ann in annotations:
            obj = {
                "frame": ann.frame_index,
                "front_prob": ann.front_prob,
                "detections": [
                    {"label": d.label, "box": list(d.box), "conf": d.confidence}
                    for d in ann.detections
                ],
            }
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
