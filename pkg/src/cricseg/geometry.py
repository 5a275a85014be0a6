"""Bounce-pixel to pitch-distance conversion and delivery classification.

The camera zooms between ball release and bounce, so the pitch's pixel
height in the bounce frame is recovered by scaling the release-frame
pitch height by the ratio of the batsman's apparent heights (the zoom
factor). A one-dimensional perspective map then converts the bounce row
into metres from the batsman's stumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from cricseg.backend import FrameAnnotations
from cricseg.tracker import Trajectory

FULL_PITCHED = "full_pitched"
GOOD_LENGTH = "good_length"
SHORT_PITCHED = "short_pitched"
DELIVERY_TYPES = (FULL_PITCHED, GOOD_LENGTH, SHORT_PITCHED)

# Wire tokens used in delivery reports.
DELIVERY_WIRE = {FULL_PITCHED: "full", GOOD_LENGTH: "good", SHORT_PITCHED: "short"}


class GeometryError(Exception):
    """Geometry failure; ``stage`` names the operation that failed."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class PitchSpec:
    """Physical pitch constants and the length-category thresholds.

    20.12 m stumps to stumps with 1.22 m from each set of stumps to its
    crease are the standard pitch dimensions; the crease-to-crease span
    is therefore 17.68 m.
    """

    stumps_to_stumps_m: float = 20.12
    crease_offset_m: float = 1.22
    full_max_m: float = 6.0
    good_max_m: float = 8.0
    tilt_deg: float = 20.0

    def __post_init__(self) -> None:
        if not 0.0 < self.full_max_m < self.good_max_m < self.stumps_to_stumps_m:
            raise ValueError("need 0 < full_max_m < good_max_m < stumps_to_stumps_m")
        if not 0.0 <= self.tilt_deg < 90.0:
            raise ValueError("tilt_deg must be in [0, 90)")

    @property
    def crease_span_m(self) -> float:
        return self.stumps_to_stumps_m - 2.0 * self.crease_offset_m

    @property
    def far_crease_m(self) -> float:
        """Distance of the bowler's crease from the batsman's stumps."""
        return self.crease_offset_m + self.crease_span_m


@dataclass(frozen=True)
class RowCalibration:
    """Pixel rows of the two creases in the bounce frame.

    The front camera looks down the pitch from behind the bowler, so the
    batsman's crease sits lower on screen than the bowler's.
    """

    batsman_crease_row: float
    bowler_crease_row: float
    tilt_deg: float = 20.0

    def __post_init__(self) -> None:
        if not self.batsman_crease_row > self.bowler_crease_row:
            raise ValueError("batsman crease must be below bowler crease on screen")


def batsman_height(annotations: FrameAnnotations) -> float:
    """Pixel height of the highest-confidence batsman box."""
    det = annotations.best("batsman")
    if det is None:
        raise GeometryError("batsman_height", "no batsman detection in frame")
    return det.height


def pitch_pixel_height(annotations: FrameAnnotations) -> float:
    """Pixel span from the batsman box bottom up to the bowler box bottom."""
    batsman = annotations.best("batsman")
    if batsman is None:
        raise GeometryError("pitch_pixel_height", "no batsman detection in frame")
    bowler = annotations.best("bowler")
    if bowler is None:
        raise GeometryError("pitch_pixel_height", "no bowler detection in frame")
    span = batsman.bottom_row - bowler.bottom_row
    if span <= 0:
        raise GeometryError(
            "pitch_pixel_height",
            "bowler box bottom is not above the batsman box bottom",
        )
    return span


def zoom_factor(h1: float, h2: float) -> float:
    """Apparent-size ratio between bounce frame and release frame."""
    if h1 <= 0 or h2 <= 0:
        raise GeometryError("zoom_factor", "batsman heights must be positive")
    return h2 / h1


def scaled_pitch_height(zoom: float, p1: float) -> float:
    """Pitch pixel height in the bounce frame."""
    if zoom <= 0 or p1 <= 0:
        raise GeometryError("scaled_pitch_height", "zoom and pitch height must be positive")
    return zoom * p1


def row_to_distance(row: float, calib: RowCalibration, pitch: PitchSpec) -> float:
    """Map a pixel row between the creases to metres from the batsman's
    stumps.

    The pitch is modelled as a planar strip tilted by ``tilt_deg`` out of
    the image plane; the screen-normalised position t maps to the
    along-pitch fraction u = t / (cos(tilt) + t * (1 - cos(tilt))), which
    degenerates to u = t for zero tilt. Endpoints are exact for any tilt.
    """
    if not calib.bowler_crease_row <= row <= calib.batsman_crease_row:
        raise GeometryError(
            "row_to_distance",
            f"row {row} outside crease span "
            f"[{calib.bowler_crease_row}, {calib.batsman_crease_row}]",
        )
    span = calib.batsman_crease_row - calib.bowler_crease_row
    t = (calib.batsman_crease_row - row) / span
    c = math.cos(math.radians(calib.tilt_deg))
    u = t / (c + t * (1.0 - c))
    return pitch.crease_offset_m + u * pitch.crease_span_m


def distance_to_row(d: float, calib: RowCalibration, pitch: PitchSpec) -> float:
    """Inverse of row_to_distance over the crease-to-crease span."""
    if not pitch.crease_offset_m <= d <= pitch.far_crease_m:
        raise GeometryError(
            "distance_to_row",
            f"distance {d} outside crease span "
            f"[{pitch.crease_offset_m}, {pitch.far_crease_m}]",
        )
    u = (d - pitch.crease_offset_m) / pitch.crease_span_m
    c = math.cos(math.radians(calib.tilt_deg))
    t = u * c / (1.0 - u * (1.0 - c))
    return calib.batsman_crease_row - t * (calib.batsman_crease_row - calib.bowler_crease_row)


def classify_delivery(d: float, pitch: PitchSpec) -> str:
    """Bucket a bounce distance: the category boundaries belong to
    good-length."""
    if not 0.0 <= d <= pitch.stumps_to_stumps_m:
        raise GeometryError("classify_delivery", f"distance {d} outside the pitch")
    if d < pitch.full_max_m:
        return FULL_PITCHED
    if d <= pitch.good_max_m:
        return GOOD_LENGTH
    return SHORT_PITCHED


@dataclass(frozen=True)
class DeliveryResult:
    delivery_type: str
    distance_m: float
    zoom: float
    bounce_frame: int
    bounce_row: float


def classify_clip_delivery(
    trajectory: Trajectory,
    release_annotations: FrameAnnotations,
    bounce_annotations: FrameAnnotations,
    pitch: PitchSpec,
) -> DeliveryResult:
    """Full bounce-distance pipeline for one tracked delivery.

    Measures the batsman in both frames and the pitch span in the release
    frame, rescales the span by the zoom factor, anchors it at the bounce
    frame's batsman box bottom, and converts the trajectory's bounce row.
    Component failures propagate with the failing stage named.
    """
    if trajectory.bounce_index is None:
        raise GeometryError("classify_clip_delivery", "trajectory has no bounce")
    bounce_point = trajectory.points[trajectory.bounce_index]

    h1 = batsman_height(release_annotations)
    p1 = pitch_pixel_height(release_annotations)
    h2 = batsman_height(bounce_annotations)
    zoom = zoom_factor(h1, h2)
    p2 = scaled_pitch_height(zoom, p1)

    anchor = bounce_annotations.best("batsman")
    assert anchor is not None  # batsman_height above would have raised
    calib = RowCalibration(
        batsman_crease_row=anchor.bottom_row,
        bowler_crease_row=anchor.bottom_row - p2,
        tilt_deg=pitch.tilt_deg,
    )
    d = row_to_distance(bounce_point.row, calib, pitch)
    return DeliveryResult(
        delivery_type=classify_delivery(d, pitch),
        distance_m=d,
        zoom=zoom,
        bounce_frame=bounce_point.frame,
        bounce_row=bounce_point.row,
    )
