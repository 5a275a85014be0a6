from __future__ import annotations

import math

import pytest

from cricseg.backend import Detection, FrameAnnotations
from cricseg.geometry import (
    FULL_PITCHED,
    GOOD_LENGTH,
    SHORT_PITCHED,
    GeometryError,
    PitchSpec,
    RowCalibration,
    batsman_height,
    classify_clip_delivery,
    classify_delivery,
    distance_to_row,
    pitch_pixel_height,
    row_to_distance,
    scaled_pitch_height,
    zoom_factor,
)
from cricseg.tracker import Trajectory, TrackPoint

from _support import geometry_oracle_distance

PITCH = PitchSpec()


def ann(*dets):
    return FrameAnnotations(0, 0.9, tuple(dets))


def batsman(h, conf=0.9, bottom=600.0, x=500.0, w=60.0):
    return Detection("batsman", (x, bottom - h, w, h), conf)


def bowler(bottom, h=80.0, conf=0.8):
    return Detection("bowler", (600.0, bottom - h, 50.0, h), conf)


class TestMeasurements:
    def test_single_batsman(self):
        assert batsman_height(ann(batsman(200))) == 200

    def test_highest_confidence_wins(self):
        assert batsman_height(ann(batsman(180, 0.9), batsman(300, 0.4))) == 180

    def test_missing_batsman(self):
        with pytest.raises(GeometryError, match="batsman_height"):
            batsman_height(ann())

    def test_pitch_span(self):
        assert pitch_pixel_height(ann(batsman(100, bottom=600), bowler(200))) == 400

    def test_equal_bottoms_rejected(self):
        with pytest.raises(GeometryError, match="pitch_pixel_height"):
            pitch_pixel_height(ann(batsman(100, bottom=600), bowler(600)))

    def test_bowler_below_batsman_rejected(self):
        with pytest.raises(GeometryError, match="pitch_pixel_height"):
            pitch_pixel_height(ann(batsman(100, bottom=400), bowler(650)))

    def test_missing_bowler_names_stage(self):
        with pytest.raises(GeometryError, match="pitch_pixel_height"):
            pitch_pixel_height(ann(batsman(100)))


class TestZoom:
    def test_identity(self):
        assert zoom_factor(200, 200) == 1.0

    def test_zoomed_in(self):
        assert zoom_factor(100, 150) == 1.5

    def test_zero_height_rejected(self):
        with pytest.raises(GeometryError, match="zoom_factor"):
            zoom_factor(0, 100)

    def test_scaled_height(self):
        assert scaled_pitch_height(1.5, 400) == 600
        assert scaled_pitch_height(1.0, 400) == 400
        assert scaled_pitch_height(0.5, 400) == 200

    def test_scaled_rejects_nonpositive(self):
        with pytest.raises(GeometryError, match="scaled_pitch_height"):
            scaled_pitch_height(0.0, 400)


class TestRowToDistance:
    def test_batsman_crease_endpoint(self):
        calib = RowCalibration(600, 200, tilt_deg=20)
        assert row_to_distance(600, calib, PITCH) == pytest.approx(1.22)

    def test_bowler_crease_endpoint(self):
        calib = RowCalibration(600, 200, tilt_deg=20)
        assert row_to_distance(200, calib, PITCH) == pytest.approx(18.90)

    def test_zero_tilt_midpoint(self):
        calib = RowCalibration(600, 200, tilt_deg=0)
        assert row_to_distance(400, calib, PITCH) == pytest.approx(10.06)

    def test_row_out_of_range(self):
        calib = RowCalibration(600, 200)
        with pytest.raises(GeometryError, match="row_to_distance"):
            row_to_distance(601, calib, PITCH)

    def test_degenerate_calibration_rejected(self):
        with pytest.raises(ValueError):
            RowCalibration(300, 300)

    @pytest.mark.parametrize("tilt", [0.0, 10.0, 20.0, 30.0])
    def test_against_render_and_lookup_oracle(self, tilt):
        calib = RowCalibration(620.0, 180.0, tilt_deg=tilt)
        for frac in (0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95):
            row = calib.bowler_crease_row + frac * (
                calib.batsman_crease_row - calib.bowler_crease_row
            )
            got = row_to_distance(row, calib, PITCH)
            want = geometry_oracle_distance(row, calib, PITCH)
            assert got == pytest.approx(want, abs=0.005)

    @pytest.mark.parametrize("tilt", [0.0, 10.0, 20.0, 30.0])
    def test_round_trip_within_two_centimeters(self, tilt):
        calib = RowCalibration(611.0, 143.0, tilt_deg=tilt)
        d = 1.22
        while d <= 18.90:
            row = distance_to_row(d, calib, PITCH)
            assert row_to_distance(row, calib, PITCH) == pytest.approx(d, abs=0.02)
            d += 0.17

    def test_strictly_decreasing_in_row(self):
        calib = RowCalibration(600, 200, tilt_deg=20)
        previous = math.inf
        for row in range(200, 601, 5):
            d = row_to_distance(row, calib, PITCH)
            assert d < previous
            previous = d


class TestClassifyDelivery:
    def test_published_thresholds(self):
        assert classify_delivery(5.0, PITCH) == FULL_PITCHED
        assert classify_delivery(6.0, PITCH) == GOOD_LENGTH
        assert classify_delivery(8.0, PITCH) == GOOD_LENGTH
        assert classify_delivery(9.5, PITCH) == SHORT_PITCHED

    def test_partition_has_no_gaps_or_overlaps(self):
        steps = 2012
        for i in range(steps + 1):
            d = 20.12 * i / steps
            kind = classify_delivery(d, PITCH)
            if d < 6.0:
                assert kind == FULL_PITCHED
            elif d <= 8.0:
                assert kind == GOOD_LENGTH
            else:
                assert kind == SHORT_PITCHED

    def test_out_of_range_rejected(self):
        with pytest.raises(GeometryError):
            classify_delivery(-0.1, PITCH)
        with pytest.raises(GeometryError):
            classify_delivery(20.2, PITCH)

    def test_alternate_good_length_bound(self):
        wide = PitchSpec(good_max_m=9.0)
        assert classify_delivery(8.5, wide) == GOOD_LENGTH
        assert classify_delivery(9.5, wide) == SHORT_PITCHED


def delivery_fixture(scale=1.0, zoom=1.25, bounce_row_frac=0.5):
    """Release/bounce annotations plus a trajectory, scalable in pixels."""
    h1 = 160.0 * scale
    p1 = 400.0 * scale
    batsman_bottom = 620.0 * scale
    release = ann(
        batsman(h1, bottom=batsman_bottom, x=490.0 * scale, w=60.0 * scale),
        bowler(batsman_bottom - p1, h=70.0 * scale),
    )
    h2 = h1 * zoom
    bounce_ann = ann(
        batsman(h2, bottom=batsman_bottom, x=490.0 * scale, w=60.0 * scale),
        bowler(batsman_bottom - p1, h=70.0 * scale),
    )
    p2 = zoom * p1
    bounce_row = batsman_bottom - bounce_row_frac * p2
    rows = [bounce_row - 120.0 * scale, bounce_row - 40.0 * scale, bounce_row, bounce_row - 30.0 * scale]
    points = tuple(TrackPoint(10 + i, 400.0 * scale, r) for i, r in enumerate(rows))
    return Trajectory(points), release, bounce_ann


class TestClipComposition:
    def test_zoom_one_bounce_at_batsman_crease(self):
        trajectory, release, bounce = delivery_fixture(zoom=1.0, bounce_row_frac=0.0)
        result = classify_clip_delivery(trajectory, release, bounce, PITCH)
        assert result.distance_m == pytest.approx(1.22)
        assert result.delivery_type == FULL_PITCHED
        assert result.zoom == pytest.approx(1.0)

    def test_missing_bowler_in_release_names_stage(self):
        trajectory, _, bounce = delivery_fixture()
        release_without_bowler = ann(batsman(160.0, bottom=620.0))
        with pytest.raises(GeometryError) as err:
            classify_clip_delivery(trajectory, release_without_bowler, bounce, PITCH)
        assert err.value.stage == "pitch_pixel_height"

    def test_no_bounce_rejected(self):
        t = Trajectory((TrackPoint(0, 1, 10), TrackPoint(1, 1, 20), TrackPoint(2, 1, 30)))
        _, release, bounce = delivery_fixture()
        with pytest.raises(GeometryError, match="no bounce"):
            classify_clip_delivery(t, release, bounce, PITCH)

    @pytest.mark.parametrize("scale", [0.5, 2.0, 3.0])
    def test_zoom_composition_scale_invariance(self, scale):
        base_t, base_r, base_b = delivery_fixture(scale=1.0)
        scaled_t, scaled_r, scaled_b = delivery_fixture(scale=scale)
        base = classify_clip_delivery(base_t, base_r, base_b, PITCH)
        scaled = classify_clip_delivery(scaled_t, scaled_r, scaled_b, PITCH)
        assert scaled.distance_m == pytest.approx(base.distance_m, abs=1e-9)
        assert scaled.delivery_type == base.delivery_type
        assert scaled.zoom == pytest.approx(base.zoom)

    def test_matches_direct_row_conversion(self):
        trajectory, release, bounce = delivery_fixture(zoom=1.25, bounce_row_frac=0.4)
        result = classify_clip_delivery(trajectory, release, bounce, PITCH)
        calib = RowCalibration(620.0, 620.0 - 1.25 * 400.0, tilt_deg=20.0)
        want = row_to_distance(trajectory.points[2].row, calib, PITCH)
        assert result.distance_m == pytest.approx(want)
