import random

import pytest

from screenflow.capture import (
    BehavioralEvent,
    CaptureError,
    StrokeSet,
    fold_media_stats,
    image_to_data_uri,
    parse_data_uri,
    png_bytes,
    strokes_to_image,
)

from .oracles import brute_force_media_stats


def ev(kind, t, asset="a1"):
    return BehavioralEvent(kind, t, {"asset_id": asset})


class TestEvents:
    def test_kind_must_be_known(self):
        with pytest.raises(ValueError):
            BehavioralEvent("telepathy", 0)

    def test_required_payload_enforced(self):
        with pytest.raises(ValueError):
            BehavioralEvent("answer-changed", 10, {})
        with pytest.raises(ValueError):
            BehavioralEvent("media-play", 10, {})
        BehavioralEvent("focus-lost", 10)  # no payload needed

    def test_json_round_trip(self):
        event = BehavioralEvent("answer-changed", 42,
                                {"item_id": "q1", "screen_id": "s1"},
                                frozenset({"non-monotonic"}))
        assert BehavioralEvent.from_json(event.to_json()) == event


class TestMediaFold:
    def test_no_events(self):
        stats = fold_media_stats([], "a1")
        assert (stats.stall_count, stats.total_stall_ms, stats.playback_ms) == (0, 0, 0)
        assert not stats.completed

    def test_single_stall_arithmetic(self):
        events = [ev("media-play", 0), ev("media-stall-start", 1000),
                  ev("media-stall-end", 1500), ev("media-ended", 5000)]
        stats = fold_media_stats(events, "a1")
        assert stats.stall_count == 1
        assert stats.total_stall_ms == 500
        assert stats.playback_ms == 5000
        assert stats.completed

    def test_unmatched_stall_closed_at_log_end_and_flagged(self):
        events = [ev("media-play", 0), ev("media-stall-start", 200),
                  ev("media-pause", 900)]
        stats = fold_media_stats(events, "a1")
        assert stats.total_stall_ms == 700
        assert "unclosed-stall" in stats.flags

    def test_other_assets_ignored(self):
        events = [ev("media-play", 0), ev("media-stall-start", 10, asset="b"),
                  ev("media-ended", 100)]
        stats = fold_media_stats(events, "a1")
        assert stats.stall_count == 0
        assert stats.playback_ms == 100

    def test_fold_matches_brute_force_on_random_logs(self):
        rng = random.Random(99)
        kinds = ["media-play", "media-pause", "media-stall-start",
                 "media-stall-end", "media-ended"]
        for _ in range(300):
            t = 0
            raw = []
            for _ in range(rng.randrange(0, 25)):
                t += rng.randrange(0, 400)
                raw.append((rng.choice(kinds), t, rng.choice(["a1", "a2"])))
            events = [ev(k, t, a) for k, t, a in raw]
            for asset in ("a1", "a2"):
                stats = fold_media_stats(events, asset)
                expected = brute_force_media_stats(raw, asset)
                assert stats.stall_count == expected["stall_count"]
                assert stats.total_stall_ms == expected["total_stall_ms"]
                assert stats.playback_ms == expected["playback_ms"]
                assert stats.completed == expected["completed"]


class TestStrokes:
    def test_point_outside_canvas_rejected(self):
        with pytest.raises(ValueError):
            StrokeSet(100, 50, (((100.0, 10.0, 0),),))
        with pytest.raises(ValueError):
            StrokeSet(100, 50, (((5.0, -1.0, 0),),))

    def test_time_must_not_decrease_within_stroke(self):
        with pytest.raises(ValueError):
            StrokeSet(100, 50, (((1.0, 1.0, 10), (2.0, 2.0, 5)),))

    def test_empty_canvas_errors(self):
        with pytest.raises(CaptureError) as exc:
            strokes_to_image(StrokeSet(0, 10))
        assert exc.value.code == "EMPTY_CANVAS"

    def test_empty_strokes_all_white(self):
        image = strokes_to_image(StrokeSet(40, 30))
        assert image.size == (40, 30)
        assert image.getextrema() == (255, 255)

    def test_ink_stays_inside_dilated_bounding_box(self):
        stroke = ((10.0, 15.0, 0), (30.0, 15.0, 50))
        image = strokes_to_image(StrokeSet(60, 30, (stroke,)))
        pixels = image.load()
        margin = 2  # line width dilation
        dark = [(x, y) for x in range(60) for y in range(30) if pixels[x, y] < 255]
        assert dark, "stroke left no ink"
        for x, y in dark:
            assert 10 - margin <= x <= 30 + margin
            assert 15 - margin <= y <= 15 + margin

    def test_rendering_deterministic(self):
        rng = random.Random(7)
        strokes = []
        for _ in range(5):
            t = 0
            pts = []
            for _ in range(rng.randrange(1, 12)):
                t += rng.randrange(0, 40)
                pts.append((rng.uniform(0, 199.9), rng.uniform(0, 119.9), t))
            strokes.append(tuple(pts))
        ss = StrokeSet(200, 120, tuple(strokes))
        assert png_bytes(strokes_to_image(ss)) == png_bytes(strokes_to_image(ss))


class TestDataUri:
    def test_prefix_and_round_trip(self):
        image = strokes_to_image(StrokeSet(1, 1))
        uri = image_to_data_uri(image)
        assert uri.startswith("data:image/png;base64,")
        media_type, payload = parse_data_uri(uri)
        assert media_type == "image/png"
        assert payload == png_bytes(image)

    def test_bytes_round_trip_random(self):
        rng = random.Random(5)
        for _ in range(50):
            blob = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 200)))
            uri = image_to_data_uri(blob, "image/png")
            assert parse_data_uri(uri) == ("image/png", blob)

    def test_unsupported_media_type(self):
        with pytest.raises(CaptureError) as exc:
            image_to_data_uri(b"x", "text/plain")
        assert exc.value.code == "UNSUPPORTED_MEDIA_TYPE"
