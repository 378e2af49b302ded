import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import patdet
from patdet import ConfigError, FrameLabel
from patdet.core import LabeledFrameSet, report_from_scores


class TestFrameNew:
    def test_minimal_frame(self):
        f = patdet.frame_new(1, 1, 1, [0.5])
        assert f.shape == (1, 1, 1)
        assert f.data[0, 0, 0] == np.float32(0.5)

    def test_range_violation(self):
        with pytest.raises(ConfigError):
            patdet.frame_new(1, 1, 1, [1.5], unit_range=True)
        with pytest.raises(ConfigError):
            patdet.frame_new(1, 1, 1, [-0.1], unit_range=True)

    def test_range_not_checked_by_default(self):
        f = patdet.frame_new(1, 1, 1, [-0.5])
        assert f.data[0, 0, 0] == np.float32(-0.5)

    def test_shape_check(self, rng):
        data = rng.uniform(0, 1, 12)
        f = patdet.frame_new(2, 2, 3, data, unit_range=True)
        assert f.height == 2 and f.width == 2 and f.channels == 3

    def test_length_mismatch(self):
        with pytest.raises(ConfigError):
            patdet.frame_new(2, 2, 3, [0.1] * 11)

    def test_bad_dims(self):
        with pytest.raises(ConfigError):
            patdet.frame_new(0, 1, 1, [])
        with pytest.raises(ConfigError):
            patdet.frame_new(1, -1, 1, [0.2])
        with pytest.raises(ConfigError):
            patdet.frame_new(1.5, 1, 1, [0.2, 0.3])

    def test_non_finite_rejected(self):
        with pytest.raises(ConfigError):
            patdet.frame_new(1, 1, 1, [np.nan])
        with pytest.raises(ConfigError):
            patdet.frame_new(1, 1, 2, [0.1, np.inf])

    def test_immutable(self):
        f = patdet.frame_new(1, 1, 1, [0.5])
        with pytest.raises(ValueError):
            f.data[0, 0, 0] = 0.0

    @given(
        h=st.integers(-1, 4), w=st.integers(-1, 4), c=st.integers(-1, 4),
        extra=st.integers(-2, 2),
        lo=st.floats(-0.5, 0.0), hi=st.floats(1.0, 1.5),
        unit=st.booleans(),
        data=st.data(),
    )
    @settings(max_examples=120, deadline=None)
    def test_totality(self, h, w, c, extra, lo, hi, unit, data):
        """Every input either builds a valid Frame or raises ConfigError."""
        n = max(h * w * c + extra, 0) if min(h, w, c) > 0 else abs(extra)
        values = data.draw(
            st.lists(st.floats(lo, hi, allow_nan=False), min_size=n, max_size=n)
        )
        valid_dims = min(h, w, c) > 0 and extra == 0
        in_range = all(0.0 <= v <= 1.0 for v in values)
        try:
            f = patdet.frame_new(h, w, c, values, unit_range=unit)
        except ConfigError:
            assert not valid_dims or (unit and not in_range)
        else:
            assert valid_dims
            assert f.shape == (h, w, c)


class TestVideoSequence:
    def test_paper_scale_config(self, rng):
        frames = [
            patdet.frame_new(112, 112, 3, rng.uniform(0, 1, (112, 112, 3)), unit_range=True)
            for _ in range(3)
        ]
        frames = frames * 14  # 42 is fine; use exactly 40
        video = patdet.video_from_frames(frames[:40], id="clip")
        assert video.length == 40
        assert video.frame_shape == (112, 112, 3)

    def test_single_frame_rejected(self, rng):
        f = patdet.frame_new(4, 4, 1, rng.uniform(0, 1, 16))
        with pytest.raises(ConfigError):
            patdet.video_from_frames([f])
        with pytest.raises(ConfigError):
            patdet.video_from_frames([])

    def test_mixed_sizes_rejected(self, rng):
        a = patdet.frame_new(4, 4, 1, rng.uniform(0, 1, 16))
        b = patdet.frame_new(4, 5, 1, rng.uniform(0, 1, 20))
        with pytest.raises(ConfigError):
            patdet.video_from_frames([a, b])

    def test_out_of_range_rejected(self):
        with pytest.raises(ConfigError):
            patdet.video_from_array(np.full((2, 2, 2, 1), 1.5, dtype=np.float32))

    def test_frames_roundtrip(self, rng):
        data = rng.uniform(0, 1, (3, 4, 4, 2)).astype(np.float32)
        video = patdet.video_from_array(data, id="v")
        assert len(video.frames) == 3
        assert np.array_equal(video.frames[1].data, data[1])


class TestDetectionReport:
    def test_flags_follow_scores(self):
        r = report_from_scores([0.1, 0.5, 0.9, 0.49], threshold=2)
        assert r.per_frame_flags == (
            FrameLabel.CLEAN, FrameLabel.ADVERSARIAL, FrameLabel.ADVERSARIAL,
            FrameLabel.CLEAN,
        )
        assert r.video_verdict == FrameLabel.ADVERSARIAL
        assert r.flagged_count == 2

    def test_below_threshold_is_clean(self):
        r = report_from_scores([0.9, 0.1, 0.1], threshold=2)
        assert r.video_verdict == FrameLabel.CLEAN

    def test_inconsistent_construction_rejected(self):
        with pytest.raises(ConfigError):
            patdet.DetectionReport(
                per_frame_scores=(0.9,),
                per_frame_flags=(FrameLabel.CLEAN,),  # contradicts score
                video_verdict=FrameLabel.CLEAN,
                threshold_used=1,
            )
        with pytest.raises(ConfigError):
            patdet.DetectionReport(
                per_frame_scores=(0.9,),
                per_frame_flags=(FrameLabel.ADVERSARIAL,),
                video_verdict=FrameLabel.CLEAN,  # contradicts flags
                threshold_used=1,
            )

    def test_bad_threshold(self):
        with pytest.raises(ConfigError):
            report_from_scores([0.1], threshold=0)

    @given(
        scores=st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=20),
        threshold=st.integers(1, 6),
    )
    @settings(max_examples=100, deadline=None)
    def test_consistency_property(self, scores, threshold):
        r = report_from_scores(scores, threshold)
        n_adv = sum(s >= 0.5 for s in scores)
        assert r.flagged_count == n_adv
        assert (r.video_verdict == FrameLabel.ADVERSARIAL) == (n_adv >= threshold)


class TestLabeledFrameSet:
    def test_unique_keys_enforced(self, rng):
        frames = rng.uniform(0, 1, (2, 4, 4, 1)).astype(np.float32)
        labels = (FrameLabel.CLEAN, FrameLabel.ADVERSARIAL)
        with pytest.raises(ConfigError):
            LabeledFrameSet(frames, labels, ("v", "v"), (0, 0))
        ok = LabeledFrameSet(frames, labels, ("v", "v"), (0, 1))
        assert len(ok) == 2

    def test_length_mismatch(self, rng):
        frames = rng.uniform(0, 1, (2, 4, 4, 1)).astype(np.float32)
        with pytest.raises(ConfigError):
            LabeledFrameSet(frames, (FrameLabel.CLEAN,), ("v",), (0,))
