"""Pseudo perturbations for training and surrogate attacks for evaluation.

Training-side noise is zero-mean Gaussian with a standard deviation sigma
drawn fresh per frame, either uniformly from a range (the default regime,
0.0001 to 0.05 on unit-scale pixels) or held fixed for ablations. The noise
is added to transition frames without clamping; signed transition space is
where the detector operates.

The surrogate attacks stand in for real optimized attacks at desk scale:
`surrogate_sparse_attack` perturbs a chosen fraction of frames with iid
Gaussian pixel noise, `surrogate_dense_attack` adds one fixed uniform
pattern to every frame, optionally row-shifted per frame. Attacked source
videos are clamped back to [0, 1] because they are pixel data.

All randomness flows through an explicit numpy Generator (PCG64). Gaussian
draws use numpy's ziggurat sampler; a given (seed, call sequence) is
bitwise reproducible for a fixed numpy version, which is the determinism
contract. Bitwise equality across different numpy builds is not promised.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import Frame, FrameLabel, VideoSequence, _freeze_video
from .errors import ConfigError


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit unsigned seed naming one deterministic random stream."""

    seed: int

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class VaryingSigma:
    """Sigma drawn uniformly from [lo, hi] per frame."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 < self.lo < self.hi <= 1.0:
            raise ConfigError(
                f"varying sigma needs 0 < lo < hi <= 1, got lo={self.lo} hi={self.hi}"
            )


@dataclass(frozen=True)
class FixedSigma:
    """A single constant sigma (ablation mode)."""

    value: float

    def __post_init__(self):
        if not 0.0 < self.value <= 1.0:
            raise ConfigError(f"fixed sigma needs 0 < value <= 1, got {self.value}")


SigmaMode = Union[VaryingSigma, FixedSigma]

DEFAULT_SIGMA_MODE = VaryingSigma(0.0001, 0.05)


def parse_sigma_mode(spec: str) -> SigmaMode:
    """Parse 'varying:LO:HI' or 'fixed:V' into a SigmaMode."""
    parts = spec.split(":")
    try:
        if parts[0] == "varying" and len(parts) == 3:
            return VaryingSigma(float(parts[1]), float(parts[2]))
        if parts[0] == "fixed" and len(parts) == 2:
            return FixedSigma(float(parts[1]))
    except ValueError as exc:
        raise ConfigError(f"bad sigma mode {spec!r}: {exc}") from exc
    raise ConfigError(f"bad sigma mode {spec!r}, expected varying:LO:HI or fixed:V")


def sample_sigma(rng: np.random.Generator, mode: SigmaMode) -> float:
    """Draw one sigma according to the mode."""
    if isinstance(mode, VaryingSigma):
        return float(rng.uniform(mode.lo, mode.hi))
    if isinstance(mode, FixedSigma):
        return mode.value
    raise ConfigError(f"unknown sigma mode {mode!r}")


def sample_sigmas(rng: np.random.Generator, mode: SigmaMode, n: int) -> np.ndarray:
    """Vectorized sigma draws, equivalent to n sequential sample_sigma calls."""
    if isinstance(mode, VaryingSigma):
        return rng.uniform(mode.lo, mode.hi, size=n)
    if isinstance(mode, FixedSigma):
        return np.full(n, mode.value)
    raise ConfigError(f"unknown sigma mode {mode!r}")


def gaussian_mask(rng: np.random.Generator, shape, sigma: float) -> Frame:
    """An (H, W, C) frame of iid N(0, sigma^2) samples."""
    if sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    if len(shape) != 3 or any(int(s) < 1 for s in shape):
        raise ConfigError(f"mask shape must be (H, W, C), got {shape}")
    data = rng.normal(0.0, sigma, size=tuple(int(s) for s in shape))
    data.flags.writeable = False
    return Frame(data)


def pseudo_adversarial(tr: Frame, rng: np.random.Generator, mode: SigmaMode) -> Frame:
    """Transition frame plus a fresh Gaussian mask; never clamped."""
    sigma = sample_sigma(rng, mode)
    mask = gaussian_mask(rng, tr.shape, sigma)
    out = tr.data + mask.data
    out.flags.writeable = False
    return Frame(out)


def surrogate_sparse_attack(video: VideoSequence, rho: float, sigma_atk: float,
                            rng: np.random.Generator):
    """Perturb ceil(rho * T) randomly chosen frames with Gaussian pixel noise.

    Returns (attacked video, per-frame labels). Perturbed frames are clamped
    to [0, 1]; labels mark exactly the perturbed indices Adversarial.
    """
    if not 0.0 < rho <= 1.0:
        raise ConfigError(f"rho must be in (0, 1], got {rho}")
    if sigma_atk <= 0:
        raise ConfigError(f"sigma_atk must be positive, got {sigma_atk}")
    t = video.length
    k = math.ceil(rho * t)
    chosen = np.sort(rng.choice(t, size=k, replace=False))
    data = np.array(video.data, copy=True)
    for idx in chosen:
        noisy = data[idx] + rng.normal(0.0, sigma_atk, size=data[idx].shape)
        data[idx] = np.clip(noisy, 0.0, 1.0)
    labels = [
        FrameLabel.ADVERSARIAL if i in set(chosen.tolist()) else FrameLabel.CLEAN
        for i in range(t)
    ]
    attacked = VideoSequence(_freeze_video(data.astype(video.data.dtype)), id=video.id)
    return attacked, labels


def surrogate_dense_attack(video: VideoSequence, eps: float,
                           rng: np.random.Generator, circular_shift: bool = True):
    """Add one fixed uniform [-eps, eps] pattern to every frame.

    With circular_shift the pattern is rolled down by t rows at frame t,
    mimicking a shifted universal perturbation; without it the identical
    pattern repeats on every frame. All labels are Adversarial.
    """
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    pattern = rng.uniform(-eps, eps, size=video.frame_shape)
    data = np.array(video.data, copy=True)
    for t in range(video.length):
        p = np.roll(pattern, t, axis=0) if circular_shift else pattern
        data[t] = np.clip(data[t] + p, 0.0, 1.0)
    labels = [FrameLabel.ADVERSARIAL] * video.length
    attacked = VideoSequence(_freeze_video(data.astype(video.data.dtype)), id=video.id)
    return attacked, labels
