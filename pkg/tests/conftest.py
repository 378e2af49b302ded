import numpy as np
import pytest

import patdet
from patdet.perturb import RngSeed


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_video(rng, t=5, h=8, w=8, c=3, id=""):
    data = rng.uniform(0.0, 1.0, size=(t, h, w, c)).astype(np.float32)
    return patdet.video_from_array(data, id=id)


def static_video(rng, t=5, h=8, w=8, c=3, id=""):
    frame = rng.uniform(0.0, 1.0, size=(h, w, c)).astype(np.float32)
    return patdet.video_from_array(np.broadcast_to(frame, (t, h, w, c)).copy(), id=id)


@pytest.fixture
def tiny_arch():
    return patdet.DetectorArchitecture(
        input_shape=(8, 8, 3), conv_channels=(2, 3), dense_widths=(4, 2)
    )


@pytest.fixture
def small_corpus():
    """Six tiny synthetic videos for fast end-to-end paths."""
    cfg = patdet.SynthConfig(video_count=6, frames_per_video=8, height=16, width=16,
                             object_count=1, velocity_range=(0.5, 1.5),
                             seed=RngSeed(2024))
    return patdet.synth_videos(cfg)
