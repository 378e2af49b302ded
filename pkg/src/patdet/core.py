"""Fundamental frame and video value types.

A frame is a dense H x W x C array of real intensities (row-major,
channel-last). Source video frames live in [0, 1]; transition frames and
noise masks are signed and may leave that range. All types here are
immutable after construction and safe to share between threads.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ConfigError

_FLOAT_DTYPES = (np.float32, np.float64)


class FrameLabel(IntEnum):
    """Binary frame/video label. Adversarial is the positive class."""

    CLEAN = 0
    ADVERSARIAL = 1


def _freeze(arr):
    """Return a read-only float array owned by the caller."""
    if arr.dtype not in _FLOAT_DTYPES:
        arr = arr.astype(np.float32)
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Frame:
    """One image frame: an immutable (height, width, channels) float array."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.ndim != 3:
            raise ConfigError("frame data must be a 3-d (H, W, C) array")
        if d.dtype not in _FLOAT_DTYPES:
            raise ConfigError(f"frame dtype must be float32/float64, got {d.dtype}")
        if any(s < 1 for s in d.shape):
            raise ConfigError(f"frame dims must be positive, got {d.shape}")
        if not np.isfinite(d).all():
            raise ConfigError("frame contains non-finite values")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape


def frame_new(height, width, channels, data, unit_range=False):
    """Build a validated Frame from dims plus flat or shaped data.

    With unit_range=True (source video frames) every value must lie in
    [0, 1]; transition frames and noise masks pass unit_range=False.
    """
    for name, v in (("height", height), ("width", width), ("channels", channels)):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise ConfigError(f"{name} must be a positive integer, got {v!r}")
    arr = np.asarray(data)
    if arr.size != height * width * channels:
        raise ConfigError(
            f"data length {arr.size} does not match "
            f"{height}x{width}x{channels} = {height * width * channels}"
        )
    arr = arr.reshape(height, width, channels)
    if arr.dtype not in _FLOAT_DTYPES:
        arr = arr.astype(np.float32)
    if not np.isfinite(arr).all():
        raise ConfigError("frame contains non-finite values")
    if unit_range and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ConfigError(
            f"values outside [0, 1]: min={arr.min():.6g} max={arr.max():.6g}"
        )
    return Frame(_freeze(arr))


@dataclass(frozen=True)
class VideoSequence:
    """An ordered stack of uniform-shape frames plus an opaque id.

    Stored internally as one (T, H, W, C) array. Length must be at least 2
    because the transition boundary rule substitutes the second and
    second-to-last frames, which only exist for T >= 2.
    """

    data: np.ndarray
    id: str = ""

    def __post_init__(self):
        d = self.data
        if not isinstance(d, np.ndarray) or d.ndim != 4:
            raise ConfigError("video data must be a 4-d (T, H, W, C) array")
        if d.dtype not in _FLOAT_DTYPES:
            raise ConfigError(f"video dtype must be float32/float64, got {d.dtype}")
        if d.shape[0] < 2:
            raise ConfigError(f"video needs at least 2 frames, got {d.shape[0]}")
        if any(s < 1 for s in d.shape[1:]):
            raise ConfigError(f"frame dims must be positive, got {d.shape[1:]}")
        if not np.isfinite(d).all():
            raise ConfigError("video contains non-finite values")
        if d.min() < 0.0 or d.max() > 1.0:
            raise ConfigError(
                f"video values outside [0, 1]: min={d.min():.6g} max={d.max():.6g}"
            )

    @property
    def length(self):
        return self.data.shape[0]

    @property
    def frame_shape(self):
        return self.data.shape[1:]

    @property
    def frames(self):
        """Frames as a tuple of Frame views (zero copy)."""
        return tuple(Frame(self.data[t]) for t in range(self.length))


def video_from_frames(frames, id=""):
    """Stack a non-empty list of equal-shape Frames into a VideoSequence."""
    if not frames:
        raise ConfigError("cannot build a video from an empty frame list")
    if len(frames) < 2:
        raise ConfigError(f"video needs at least 2 frames, got {len(frames)}")
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ConfigError(
                f"frame {i} shape {f.shape} differs from frame 0 shape {shape}"
            )
    stacked = np.stack([f.data for f in frames]).astype(np.float32, copy=False)
    return VideoSequence(_freeze_video(stacked), id=id)


def _freeze_video(arr):
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


def video_from_array(data, id=""):
    """Wrap a (T, H, W, C) array in a validated VideoSequence."""
    arr = np.asarray(data)
    if arr.dtype not in _FLOAT_DTYPES:
        arr = arr.astype(np.float32)
    return VideoSequence(_freeze_video(arr), id=id)


@dataclass(frozen=True)
class LabeledFrameSet:
    """A flat container of (frame, label, source video id, frame index) items.

    Frames share one shape and every (video id, frame index) pair is unique;
    used to carry training and evaluation examples between modules.
    """

    frames: np.ndarray  # (N, H, W, C)
    labels: tuple  # N FrameLabels
    video_ids: tuple  # N strings
    frame_indices: tuple  # N ints

    def __post_init__(self):
        f = self.frames
        if not isinstance(f, np.ndarray) or f.ndim != 4:
            raise ConfigError("frames must be a 4-d (N, H, W, C) array")
        n = f.shape[0]
        if not (len(self.labels) == len(self.video_ids) == len(self.frame_indices) == n):
            raise ConfigError("labels, video_ids, frame_indices must all have length N")
        keys = set(zip(self.video_ids, self.frame_indices))
        if len(keys) != n:
            raise ConfigError("(video id, frame index) pairs must be unique")

    def __len__(self):
        return self.frames.shape[0]


@dataclass(frozen=True)
class DetectionReport:
    """Per-frame scores and flags plus the video-level verdict.

    Flags and verdict are pure functions of the scores: a frame is flagged
    Adversarial iff its score >= 0.5, and the video verdict is Adversarial
    iff at least `threshold_used` frames are flagged.
    """

    per_frame_scores: tuple
    per_frame_flags: tuple
    video_verdict: FrameLabel
    threshold_used: int
    elapsed_seconds: float = 0.0
    video_id: str = field(default="", compare=False)

    def __post_init__(self):
        if not isinstance(self.threshold_used, (int, np.integer)) or self.threshold_used < 1:
            raise ConfigError(f"threshold must be a positive integer, got {self.threshold_used!r}")
        if self.elapsed_seconds < 0:
            raise ConfigError("elapsed_seconds must be non-negative")
        if len(self.per_frame_scores) != len(self.per_frame_flags):
            raise ConfigError("scores and flags must have equal length")
        for s, fl in zip(self.per_frame_scores, self.per_frame_flags):
            if not 0.0 <= s <= 1.0:
                raise ConfigError(f"score {s} outside [0, 1]")
            if fl != (FrameLabel.ADVERSARIAL if s >= 0.5 else FrameLabel.CLEAN):
                raise ConfigError("flags are not consistent with scores")
        n_adv = sum(1 for fl in self.per_frame_flags if fl == FrameLabel.ADVERSARIAL)
        expected = FrameLabel.ADVERSARIAL if n_adv >= self.threshold_used else FrameLabel.CLEAN
        if self.video_verdict != expected:
            raise ConfigError("verdict is not consistent with flags and threshold")

    @property
    def flagged_count(self):
        return sum(1 for fl in self.per_frame_flags if fl == FrameLabel.ADVERSARIAL)


def report_from_scores(scores, threshold, elapsed_seconds=0.0, video_id=""):
    """Derive flags and the video verdict from raw per-frame scores."""
    scores = tuple(float(s) for s in scores)
    flags = tuple(
        FrameLabel.ADVERSARIAL if s >= 0.5 else FrameLabel.CLEAN for s in scores
    )
    n_adv = sum(1 for fl in flags if fl == FrameLabel.ADVERSARIAL)
    verdict = FrameLabel.ADVERSARIAL if n_adv >= threshold else FrameLabel.CLEAN
    return DetectionReport(
        per_frame_scores=scores,
        per_frame_flags=flags,
        video_verdict=verdict,
        threshold_used=threshold,
        elapsed_seconds=float(elapsed_seconds),
        video_id=video_id,
    )
