"""Dataset ingestion, binary file formats, and the synthetic video generator.

Synthetic videos are a static per-video background with a few hard-edged
bright objects (rectangles or discs) translating at a constant per-video
velocity. Objects carry a fixed random texture that moves rigidly with
them; a flat-colored object would make single-frame noise detection
trivially easy, which real footage is not. Background pixels that no
object ever covers are identical across frames, so their interior
transition values are exactly zero; the generator returns coverage masks
so tests can assert that pixel for pixel.

File formats (all integers little-endian unsigned 32-bit, all floats
little-endian IEEE float32):

  .vseq   magic "VSEQ", version=1, then T, H, W, C, then T*H*W*C floats in
          [0, 1], frame-major, row-major, channel-last.

  .patm   magic "PATM", version=1, then input_mode (0 transition /
          1 original), trained (0/1), input H, W, C, layer count, then one
          (type tag, dim0, dim1) triple per layer: tag 1 = conv with
          (in_channels, out_channels), tag 2 = dense with (in_dim, out_dim).
          Payload is each layer's weight matrix then bias vector as float32
          in declaration order, using the layouts documented in patdet.nn.

Readers validate before allocating and raise DataFormatError on any
malformed input; saving then loading reproduces float32 payloads bitwise.
"""

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import nn
from .core import VideoSequence, _freeze_video
from .detector import DetectorArchitecture, DetectorModel, InputMode, model_init
from .errors import ConfigError, DataFormatError
from .perturb import RngSeed

VSEQ_MAGIC = b"VSEQ"
PATM_MAGIC = b"PATM"
FORMAT_VERSION = 1
_MAX_DIM = 2**24  # sanity cap on any single header dimension


class BackgroundMode(str, Enum):
    UNIFORM_RANDOM = "uniform"
    GRADIENT = "gradient"


@dataclass(frozen=True)
class SynthConfig:
    video_count: int
    frames_per_video: int = 16
    height: int = 64
    width: int = 64
    object_count: int = 48
    velocity_range: tuple = (1.0, 2.2)
    background_mode: BackgroundMode = BackgroundMode.UNIFORM_RANDOM
    seed: RngSeed = RngSeed(0)

    def __post_init__(self):
        for name in ("video_count", "frames_per_video", "object_count"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.frames_per_video < 2:
            raise ConfigError("frames_per_video must be at least 2")
        if self.height < 8 or self.width < 8:
            raise ConfigError(f"dims must be >= 8, got {self.height}x{self.width}")
        lo, hi = self.velocity_range
        if not 0.0 <= lo <= hi:
            raise ConfigError(f"velocity_range must satisfy 0 <= lo <= hi, got {self.velocity_range}")
        if hi > min(self.height, self.width) / 4:
            raise ConfigError(
                f"velocity {hi} exceeds min(height,width)/4 = {min(self.height, self.width) / 4}"
            )
        if not isinstance(self.background_mode, BackgroundMode):
            raise ConfigError(f"bad background_mode {self.background_mode!r}")


# intensity bands: backgrounds cover [0, 0.55], objects [0.55, 1.0]; together
# they span [0, 1] with no gap an original-frame detector could key on
_BG_LO, _BG_HI = 0.0, 0.55
_OBJ_LO, _OBJ_HI = 0.55, 1.0
# per-video object texture contrast (uniform width); the moving texture's
# transition residue is what bounds how small a perturbation is detectable
_TEX_W_LO, _TEX_W_HI = 0.038, 0.066


def _background(rng, cfg):
    h, w = cfg.height, cfg.width
    if cfg.background_mode == BackgroundMode.UNIFORM_RANDOM:
        return rng.uniform(_BG_LO, _BG_HI, size=(h, w, 3)).astype(np.float32)
    theta = rng.uniform(0, 2 * np.pi)
    yy, xx = np.mgrid[0:h, 0:w]
    g = np.cos(theta) * xx / max(w - 1, 1) + np.sin(theta) * yy / max(h - 1, 1)
    g = (g - g.min()) / max(g.max() - g.min(), 1e-9)
    g = _BG_LO + (_BG_HI - _BG_LO) * g
    return g.astype(np.float32)[:, :, None].repeat(3, axis=2)


def _draw_object(frame, mask, kind, cy, cx, size, patch):
    """Paint one rigidly translating textured object, clipped at the borders."""
    h, w = frame.shape[:2]
    y0, y1 = max(0, cy - size), min(h, cy + size + 1)
    x0, x1 = max(0, cx - size), min(w, cx + size + 1)
    if y0 >= y1 or x0 >= x1:
        return
    py, px = y0 - (cy - size), x0 - (cx - size)
    sub = patch[py:py + (y1 - y0), px:px + (x1 - x0)]
    if kind == 0:  # rectangle
        frame[y0:y1, x0:x1] = sub
        mask[y0:y1, x0:x1] = True
    else:  # disc
        yy, xx = np.mgrid[y0:y1, x0:x1]
        inside = (yy - cy) ** 2 + (xx - cx) ** 2 <= size * size
        frame[y0:y1, x0:x1][inside] = sub[inside]
        mask[y0:y1, x0:x1] |= inside


def _start_range(disp, size_margin, dim):
    """Center-coordinate range that keeps the collage over the frame at all t."""
    lo = min(0.0, -disp) - size_margin
    hi = dim - 1 + max(0.0, -disp) + size_margin
    return lo, hi


def synth_videos_with_masks(cfg: SynthConfig):
    """Generate videos plus per-frame boolean object-coverage masks.

    All of a video's objects translate together at the video's velocity, so
    with enough objects the scene is a rigidly panning textured collage over
    the static background. Start positions are drawn from a box inflated
    opposite the motion, keeping coverage steady across the whole clip.
    """
    rng = cfg.seed.generator()
    t, h, w = cfg.frames_per_video, cfg.height, cfg.width
    min_dim = min(h, w)
    size_lo, size_hi = max(2, min_dim // 6), max(3, min_dim // 3)
    videos, masks = [], []
    for i in range(cfg.video_count):
        bg = _background(rng, cfg)
        speed = rng.uniform(*cfg.velocity_range)
        theta = rng.uniform(0, 2 * np.pi)
        vy, vx = speed * np.sin(theta), speed * np.cos(theta)
        tex_w = rng.uniform(_TEX_W_LO, _TEX_W_HI)
        y_rng = _start_range(vy * (t - 1), size_hi, h)
        x_rng = _start_range(vx * (t - 1), size_hi, w)
        objs = []
        for _ in range(cfg.object_count):
            kind = int(rng.integers(0, 2))
            size = int(rng.integers(size_lo, size_hi + 1))
            side = 2 * size + 1
            b0 = rng.uniform(_OBJ_LO, _OBJ_HI - tex_w)
            patch = rng.uniform(b0, b0 + tex_w, size=(side, side, 3)).astype(np.float32)
            sy = rng.uniform(*y_rng)
            sx = rng.uniform(*x_rng)
            objs.append((kind, size, patch, sy, sx))
        frames = np.empty((t, h, w, 3), dtype=np.float32)
        cover = np.zeros((t, h, w), dtype=bool)
        for ti in range(t):
            frame = bg.copy()
            for kind, size, patch, sy, sx in objs:
                cy = int(round(sy + vy * ti))
                cx = int(round(sx + vx * ti))
                _draw_object(frame, cover[ti], kind, cy, cx, size, patch)
            frames[ti] = frame
        videos.append(VideoSequence(_freeze_video(frames), id=f"synth-{i:05d}"))
        masks.append(cover)
    return videos, masks


def synth_videos(cfg: SynthConfig):
    """Generate cfg.video_count synthetic videos (pure function of cfg)."""
    videos, _ = synth_videos_with_masks(cfg)
    return videos


# ---------------------------------------------------------------------------
# .vseq video files


def write_video(path, video: VideoSequence):
    header = struct.pack(
        "<4sIIIII", VSEQ_MAGIC, FORMAT_VERSION,
        video.length, *video.frame_shape,
    )
    payload = np.ascontiguousarray(video.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_video(path) -> VideoSequence:
    raw = Path(path).read_bytes()
    video = _parse_video_bytes(raw)
    return VideoSequence(video.data, id=Path(path).stem)


def _parse_video_bytes(raw: bytes) -> VideoSequence:
    if len(raw) < 24:
        raise DataFormatError(f"video header truncated: {len(raw)} bytes")
    magic, version, t, h, w, c = struct.unpack_from("<4sIIIII", raw, 0)
    if magic != VSEQ_MAGIC:
        raise DataFormatError(f"bad magic {magic!r}, expected {VSEQ_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported version {version}")
    if t < 2:
        raise DataFormatError(f"video needs at least 2 frames, header says {t}")
    for name, v in (("T", t), ("H", h), ("W", w), ("C", c)):
        if not 1 <= v <= _MAX_DIM:
            raise DataFormatError(f"implausible dimension {name}={v}")
    expected = 24 + 4 * t * h * w * c
    if len(raw) != expected:
        raise DataFormatError(
            f"payload length mismatch: file has {len(raw)} bytes, header implies {expected}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=24).reshape(t, h, w, c)
    if not np.isfinite(data).all():
        raise DataFormatError("payload contains non-finite values")
    if data.min() < 0.0 or data.max() > 1.0:
        raise DataFormatError("payload values outside [0, 1]")
    try:
        return VideoSequence(_freeze_video(data.astype(np.float32)))
    except ConfigError as exc:
        raise DataFormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# .patm model files

_TAG_CONV = 1
_TAG_DENSE = 2


def save_model(path, model: DetectorModel):
    arch = model.architecture
    mode_code = 0 if model.input_mode == InputMode.TRANSITION else 1
    parts = [struct.pack(
        "<4sIIIIIII", PATM_MAGIC, FORMAT_VERSION, mode_code, int(model.trained),
        *arch.input_shape, len(arch.conv_channels) + len(arch.dense_widths),
    )]
    c_in = arch.input_shape[2]
    for c_out in arch.conv_channels:
        parts.append(struct.pack("<III", _TAG_CONV, c_in, c_out))
        c_in = c_out
    d_in = arch.flat_size
    for width in arch.dense_widths:
        parts.append(struct.pack("<III", _TAG_DENSE, d_in, width))
        d_in = width
    for arr in model.weights:
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_model(path) -> DetectorModel:
    return _parse_model_bytes(Path(path).read_bytes())


def _parse_model_bytes(raw: bytes) -> DetectorModel:
    if len(raw) < 32:
        raise DataFormatError(f"model header truncated: {len(raw)} bytes")
    magic, version, mode_code, trained, h, w, c, n_layers = struct.unpack_from(
        "<4sIIIIIII", raw, 0
    )
    if magic != PATM_MAGIC:
        raise DataFormatError(f"bad magic {magic!r}, expected {PATM_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported version {version}")
    if mode_code not in (0, 1) or trained not in (0, 1):
        raise DataFormatError(f"bad mode/trained flags {mode_code}/{trained}")
    for name, v in (("H", h), ("W", w), ("C", c)):
        if not 1 <= v <= _MAX_DIM:
            raise DataFormatError(f"implausible dimension {name}={v}")
    if not 2 <= n_layers <= 64:
        raise DataFormatError(f"implausible layer count {n_layers}")
    table_end = 32 + 12 * n_layers
    if len(raw) < table_end:
        raise DataFormatError("layer table truncated")
    entries = [struct.unpack_from("<III", raw, 32 + 12 * i) for i in range(n_layers)]

    conv_channels, dense_widths = [], []
    for tag, d0, d1 in entries:
        if tag == _TAG_CONV:
            if dense_widths:
                raise DataFormatError("conv layer after dense layers")
            conv_channels.append((d0, d1))
        elif tag == _TAG_DENSE:
            dense_widths.append((d0, d1))
        else:
            raise DataFormatError(f"unknown layer tag {tag}")
        if not (1 <= d0 <= _MAX_DIM and 1 <= d1 <= _MAX_DIM):
            raise DataFormatError(f"implausible layer dims ({d0}, {d1})")
    if not conv_channels or not dense_widths:
        raise DataFormatError("model needs at least one conv and one dense layer")

    c_in = c
    for d0, d1 in conv_channels:
        if d0 != c_in:
            raise DataFormatError(f"conv expects {d0} channels where {c_in} flow in")
        c_in = d1
    div = 2 ** len(conv_channels)
    if h % div or w % div:
        raise DataFormatError(f"input {h}x{w} not divisible by 2^{len(conv_channels)}")
    flat = (h // div) * (w // div) * c_in
    d_in = flat
    for d0, d1 in dense_widths:
        if d0 != d_in:
            raise DataFormatError(f"dense expects input {d0} where {d_in} flow in")
        d_in = d1
    if d_in != 2:
        raise DataFormatError(f"final dense width must be 2, got {d_in}")

    n_floats = sum(9 * d0 * d1 + d1 for d0, d1 in conv_channels)
    n_floats += sum(d0 * d1 + d1 for d0, d1 in dense_widths)
    expected = table_end + 4 * n_floats
    if len(raw) != expected:
        raise DataFormatError(
            f"payload length mismatch: file has {len(raw)} bytes, header implies {expected}"
        )

    try:
        arch = DetectorArchitecture(
            input_shape=(h, w, c),
            conv_channels=tuple(d1 for _, d1 in conv_channels),
            dense_widths=tuple(d1 for _, d1 in dense_widths),
        )
    except ConfigError as exc:
        raise DataFormatError(str(exc)) from exc
    model = model_init(arch, rng=None,
                       input_mode=InputMode.TRANSITION if mode_code == 0 else InputMode.ORIGINAL)
    model.trained = bool(trained)
    offset = table_end
    for arr in model.weights:
        count = arr.size
        block = np.frombuffer(raw, dtype="<f4", offset=offset, count=count)
        if not np.isfinite(block).all():
            raise DataFormatError("weights contain non-finite values")
        arr[...] = block.reshape(arr.shape)
        offset += 4 * count
    return model


# ---------------------------------------------------------------------------
# image directory ingestion


def load_image_dir(path) -> VideoSequence:
    """Read a directory of equal-size 8-bit images as one video.

    Frame order is the lexicographic order of the file names (zero-pad your
    indices). Intensities are divided by 255.
    """
    from PIL import Image, UnidentifiedImageError

    directory = Path(path)
    if not directory.is_dir():
        raise DataFormatError(f"{path} is not a directory")
    files = sorted(p for p in directory.iterdir() if p.is_file())
    if len(files) < 2:
        raise DataFormatError(f"need at least 2 image frames, found {len(files)}")
    frames = []
    shape = None
    for p in files:
        try:
            with Image.open(p) as img:
                if img.mode not in ("L", "RGB"):
                    img = img.convert("RGB")
                arr = np.asarray(img, dtype=np.uint8)
        except (UnidentifiedImageError, OSError) as exc:
            raise DataFormatError(f"cannot read image {p.name}: {exc}") from exc
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise DataFormatError(
                f"image {p.name} has shape {arr.shape}, expected {shape}"
            )
        frames.append(arr.astype(np.float32) / 255.0)
    return VideoSequence(_freeze_video(np.stack(frames)), id=directory.name)
