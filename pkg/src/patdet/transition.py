"""Transition frames: the average of a frame's temporal neighbors minus
the frame itself.

For an interior frame the transition value is ((prev + next) / 2) - cur.
Static content cancels exactly, so what survives is object motion plus any
per-frame perturbation. The first and last frames have only one neighbor;
there the averaged pair is replaced by the second and second-to-last frame
respectively, giving tr[0] = X2 - X1 and tr[T-1] = X_{T-1} - X_T.

Transition values are never clamped: the sign and magnitude of the residual
is exactly the signal the detector consumes.
"""

from dataclasses import dataclass

import numpy as np

from .core import Frame, VideoSequence, _freeze_video
from .errors import ConfigError


@dataclass(frozen=True)
class TransitionSequence:
    """Per-frame transition frames aligned 1:1 with the source video."""

    data: np.ndarray  # (T, H, W, C), signed values
    source_id: str = ""

    def __post_init__(self):
        if not isinstance(self.data, np.ndarray) or self.data.ndim != 4:
            raise ConfigError("transition data must be a 4-d (T, H, W, C) array")

    @property
    def length(self):
        return self.data.shape[0]

    @property
    def frames(self):
        return tuple(Frame(self.data[t]) for t in range(self.length))


def transition_frame(prev: Frame, cur: Frame, next: Frame) -> Frame:
    """Transition frame for one interior triple."""
    if not (prev.shape == cur.shape == next.shape):
        raise ConfigError(
            f"shape mismatch: {prev.shape}, {cur.shape}, {next.shape}"
        )
    out = (prev.data + next.data) / 2 - cur.data
    out.flags.writeable = False
    return Frame(out)


def transition_stack(data: np.ndarray) -> np.ndarray:
    """Vectorized transition frames for a (T, H, W, C) stack, T >= 2.

    Includes the boundary rule at both ends. Pure and embarrassingly
    parallel across t; identical results regardless of evaluation order.
    """
    if data.ndim != 4 or data.shape[0] < 2:
        raise ConfigError("expected a (T, H, W, C) stack with T >= 2")
    out = np.empty_like(data)
    out[0] = data[1] - data[0]
    out[-1] = data[-2] - data[-1]
    if data.shape[0] > 2:
        out[1:-1] = (data[:-2] + data[2:]) / 2 - data[1:-1]
    return out


def transition_sequence(video: VideoSequence) -> TransitionSequence:
    """Transition frames for a whole video, same length and shape."""
    out = transition_stack(video.data)
    return TransitionSequence(_freeze_video(out), source_id=video.id)
