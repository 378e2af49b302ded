"""The binary detection network: a small CNN scoring frames as clean or
adversarial, and its training loop.

Training follows the per-frame recipe: each epoch, every video frame
contributes one clean example (its transition frame, or the raw frame in
original-input mode) and one adversarial example (the same frame plus a
Gaussian mask whose sigma is redrawn for that frame that epoch). Examples
are shuffled, minibatched, and fitted with cross-entropy loss and momentum
SGD. Minibatches are always processed sequentially, so a fixed seed gives
bitwise-identical weights run to run (per machine and numpy build).

The default architecture keeps the network small: three conv blocks of
16/32/64 channels (3x3, stride 1, pad 1, ReLU, 2x2 max pool), a dense
ReLU layer of 128, and a 2-way softmax head. Transition inputs are fed
raw in their signed range; original-mode inputs are raw [0, 1] frames.
"""

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import nn
from .core import Frame, FrameLabel, VideoSequence, report_from_scores
from .errors import ConfigError
from .perturb import DEFAULT_SIGMA_MODE, RngSeed, SigmaMode, sample_sigmas
from .transition import transition_stack

DEFAULT_THRESHOLD = 3  # flagged frames needed to call a video adversarial


class InputMode(str, Enum):
    TRANSITION = "transition"
    ORIGINAL = "original"


@dataclass(frozen=True)
class DetectorArchitecture:
    """Shape of the detection network.

    Each conv block is 3x3/stride 1/pad 1 with ReLU and a 2x2 max pool, so
    every block halves the spatial dims; H and W must be divisible by
    2 ** len(conv_channels). The final dense width must be 2 (class scores).
    """

    input_shape: tuple  # (H, W, C)
    conv_channels: tuple = (16, 32, 64)
    dense_widths: tuple = (128, 2)

    def __post_init__(self):
        if len(self.input_shape) != 3 or any(int(s) < 1 for s in self.input_shape):
            raise ConfigError(f"input_shape must be positive (H, W, C), got {self.input_shape}")
        if not self.conv_channels or any(int(c) < 1 for c in self.conv_channels):
            raise ConfigError(f"conv_channels must be positive ints, got {self.conv_channels}")
        if not self.dense_widths or any(int(d) < 1 for d in self.dense_widths):
            raise ConfigError(f"dense_widths must be positive ints, got {self.dense_widths}")
        if self.dense_widths[-1] != 2:
            raise ConfigError(f"final dense width must be 2, got {self.dense_widths[-1]}")
        h, w, _ = self.input_shape
        div = 2 ** len(self.conv_channels)
        if h % div or w % div:
            raise ConfigError(
                f"H and W must be divisible by {div} for {len(self.conv_channels)} "
                f"conv blocks, got {h}x{w}"
            )

    @property
    def flat_size(self):
        h, w, _ = self.input_shape
        div = 2 ** len(self.conv_channels)
        return (h // div) * (w // div) * self.conv_channels[-1]


def default_architecture(input_shape) -> DetectorArchitecture:
    return DetectorArchitecture(input_shape=tuple(int(s) for s in input_shape))


@dataclass
class DetectorModel:
    """Architecture plus live layer objects holding the weights."""

    architecture: DetectorArchitecture
    layers: list
    input_mode: InputMode = InputMode.TRANSITION
    trained: bool = False
    dtype: object = np.float32

    @property
    def weights(self):
        """Flat list of parameter arrays, in serialization order."""
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def check_finite(self):
        for w in self.weights:
            if not np.isfinite(w).all():
                raise ConfigError("model weights contain non-finite values")


def model_init(arch: DetectorArchitecture, rng: np.random.Generator,
               dtype=np.float32, input_mode: InputMode = InputMode.TRANSITION,
               ) -> DetectorModel:
    """Fresh model: He-initialized weights, zero biases."""
    layers = []
    c_in = int(arch.input_shape[2])
    for i, c_out in enumerate(arch.conv_channels):
        layers.append(nn.Conv3x3(c_in, int(c_out), rng, dtype, needs_input_grad=i > 0))
        layers.append(nn.ReLU())
        layers.append(nn.MaxPool2x2())
        c_in = int(c_out)
    layers.append(nn.Flatten())
    d_in = arch.flat_size
    for j, width in enumerate(arch.dense_widths):
        layers.append(nn.Dense(d_in, int(width), rng, dtype))
        if j < len(arch.dense_widths) - 1:
            layers.append(nn.ReLU())
        d_in = int(width)
    return DetectorModel(architecture=arch, layers=layers, input_mode=input_mode,
                         dtype=dtype)


def _as_batch(model, batch):
    """Stack Frames (or accept an (N, H, W, C) array) and check the shape."""
    if isinstance(batch, np.ndarray):
        arr = batch
        if arr.ndim == 3:
            arr = arr[None]
    else:
        items = list(batch)
        if not items:
            raise ConfigError("empty batch")
        arr = np.stack([f.data if isinstance(f, Frame) else np.asarray(f) for f in items])
    if arr.ndim != 4 or tuple(arr.shape[1:]) != tuple(model.architecture.input_shape):
        raise ConfigError(
            f"batch shape {arr.shape[1:]} does not match model input "
            f"{model.architecture.input_shape}"
        )
    return arr.astype(model.dtype, copy=False)


def _forward_logits(model, x):
    for layer in model.layers:
        x = layer.forward(x)
    return x


def forward(model: DetectorModel, batch):
    """Softmax probabilities (p_clean, p_adversarial) per item, in order."""
    x = _as_batch(model, batch)
    probs = nn.softmax(_forward_logits(model, x))
    return [(float(p[0]), float(p[1])) for p in probs]


def loss_and_grads(model: DetectorModel, batch, labels):
    """Mean cross-entropy over the batch and exact parameter gradients.

    Gradients come back as a flat list aligned with model.weights.
    """
    x = _as_batch(model, batch)
    y = np.asarray([int(l) for l in labels])
    if y.shape[0] != x.shape[0]:
        raise ConfigError(f"{x.shape[0]} frames but {y.shape[0]} labels")
    logits = _forward_logits(model, x)
    loss = nn.cross_entropy(logits, y)
    grad = nn.cross_entropy_grad(logits, y).astype(model.dtype, copy=False)
    for layer in reversed(model.layers):
        grad = layer.backward(grad)
    grads = []
    for layer in model.layers:
        grads.extend(layer.grads())
    return loss, grads


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    momentum: float = 0.9
    sigma_mode: SigmaMode = DEFAULT_SIGMA_MODE
    input_mode: InputMode = InputMode.TRANSITION
    seed: RngSeed = RngSeed(0)

    def __post_init__(self):
        if not isinstance(self.epochs, (int, np.integer)) or self.epochs < 1:
            raise ConfigError(f"epochs must be a positive int, got {self.epochs!r}")
        if not isinstance(self.batch_size, (int, np.integer)) or self.batch_size < 1:
            raise ConfigError(f"batch_size must be a positive int, got {self.batch_size!r}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")


@dataclass
class TrainHistory:
    """Per-epoch mean training loss and training accuracy."""

    losses: list = field(default_factory=list)
    accuracies: list = field(default_factory=list)
    examples_per_epoch: int = 0  # one clean + one pseudo-adversarial per frame

    def __len__(self):
        return len(self.losses)


def sgd_step(model: DetectorModel, grads, config: TrainConfig, velocity=None):
    """Classic momentum update: v <- momentum*v - lr*g; w <- w + v.

    Mutates the weights in place and returns (model, velocity).
    """
    params = model.weights
    if len(grads) != len(params):
        raise ConfigError(f"{len(grads)} grads for {len(params)} parameter arrays")
    if velocity is None:
        velocity = [np.zeros_like(p) for p in params]
    for p, g, v in zip(params, grads, velocity):
        if g.shape != p.shape:
            raise ConfigError(f"grad shape {g.shape} does not match param {p.shape}")
        v *= config.momentum
        v -= config.learning_rate * g
        p += v
    return model, velocity


def _stack_inputs(videos, input_mode):
    """Per-frame network inputs for a corpus: transitions or raw frames."""
    blocks = []
    for video in videos:
        if input_mode == InputMode.TRANSITION:
            blocks.append(transition_stack(video.data))
        else:
            blocks.append(np.asarray(video.data))
    return np.concatenate(blocks, axis=0)


def train(clean_videos, config: TrainConfig = TrainConfig(),
          rng: np.random.Generator = None, architecture: DetectorArchitecture = None):
    """Train the detector on clean videos only (noise provides the labels).

    Every epoch re-draws sigma and the Gaussian mask for each frame, so the
    network sees a different corrupted version of the same transition frame
    each time. Returns (trained model, per-epoch history).
    """
    videos = list(clean_videos)
    if not videos:
        raise ConfigError("training corpus is empty")
    shape = videos[0].frame_shape
    for v in videos:
        if v.frame_shape != shape:
            raise ConfigError(f"video {v.id!r} shape {v.frame_shape} != {shape}")
    if architecture is None:
        architecture = default_architecture(shape)
    elif tuple(architecture.input_shape) != tuple(shape):
        raise ConfigError(
            f"architecture input {architecture.input_shape} does not match videos {shape}"
        )
    if rng is None:
        rng = config.seed.generator()

    dtype = np.float32
    model = model_init(architecture, rng, dtype=dtype, input_mode=config.input_mode)
    x_clean = _stack_inputs(videos, config.input_mode).astype(dtype, copy=False)
    n = x_clean.shape[0]

    x = np.empty((2 * n,) + x_clean.shape[1:], dtype=dtype)
    x[:n] = x_clean
    y = np.concatenate([np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)])

    velocity = None
    history = TrainHistory(examples_per_epoch=2 * n)
    bs = config.batch_size
    for _ in range(config.epochs):
        sigmas = sample_sigmas(rng, config.sigma_mode, n).astype(dtype)
        # fresh pseudo-adversarial examples, chunked to bound the noise buffer
        for lo in range(0, n, 256):
            hi = min(lo + 256, n)
            z = rng.standard_normal(size=(hi - lo,) + x_clean.shape[1:], dtype=dtype)
            z *= sigmas[lo:hi, None, None, None]
            np.add(x_clean[lo:hi], z, out=x[n + lo:n + hi])
        perm = rng.permutation(2 * n)
        losses = []
        correct = 0
        for start in range(0, 2 * n, bs):
            sel = perm[start:start + bs]
            xb, yb = x[sel], y[sel]
            logits = _forward_logits(model, xb)
            losses.append(nn.cross_entropy(logits, yb))
            correct += int((logits.argmax(axis=1) == yb).sum())
            grad = nn.cross_entropy_grad(logits, yb).astype(dtype, copy=False)
            for layer in reversed(model.layers):
                grad = layer.backward(grad)
            grads = []
            for layer in model.layers:
                grads.extend(layer.grads())
            _, velocity = sgd_step(model, grads, config, velocity)
        history.losses.append(float(np.mean(losses)))
        history.accuracies.append(correct / (2 * n))
    model.trained = True
    model.check_finite()
    return model, history


def predict_scores(model: DetectorModel, frames: np.ndarray, batch_size=64) -> np.ndarray:
    """Adversarial scores for an (N, H, W, C) stack of network inputs."""
    frames = _as_batch(model, frames)
    out = np.empty(frames.shape[0])
    for lo in range(0, frames.shape[0], batch_size):
        hi = min(lo + batch_size, frames.shape[0])
        probs = nn.softmax(_forward_logits(model, frames[lo:hi]))
        out[lo:hi] = probs[:, 1]
    return out


def predict_frame(model: DetectorModel, tr: Frame) -> float:
    """Adversarial score in [0, 1] for one network-input frame."""
    return forward(model, [tr])[0][1]


def video_scores(model: DetectorModel, video: VideoSequence) -> np.ndarray:
    """Per-frame scores for a source video, honoring the model's input mode."""
    if model.input_mode == InputMode.TRANSITION:
        inputs = transition_stack(video.data)
    else:
        inputs = np.asarray(video.data)
    return predict_scores(model, inputs)


def detect_video(model: DetectorModel, video: VideoSequence,
                 threshold: int = DEFAULT_THRESHOLD):
    """Score every frame and aggregate the video verdict into a report."""
    if not isinstance(threshold, (int, np.integer)) or threshold < 1:
        raise ConfigError(f"threshold must be a positive integer, got {threshold!r}")
    start = time.perf_counter()
    scores = video_scores(model, video)
    elapsed = time.perf_counter() - start
    return report_from_scores(scores, threshold, elapsed_seconds=elapsed,
                              video_id=video.id)
