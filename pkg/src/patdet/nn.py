"""Minimal CNN building blocks with exact backpropagation, in numpy.

Everything runs channel-last (N, H, W, C). Convolutions are 3x3, stride 1,
pad 1, implemented as one GEMM per layer over an im2col view; max pooling
is 2x2 stride 2. Each layer caches what its backward pass needs, computes
parameter gradients into .dw/.db, and returns the input gradient.

Gradients are exact (they are what the finite-difference oracle in the test
suite checks them against). The only subgradient choices are ReLU'(0) = 0
and routing a pooling window's gradient to its first maximum on ties, both
measure-zero for continuous inputs.

For speed, ReLU mutates its input and the conv layers keep a padded scratch
buffer between calls. That is safe here because layers only ever see
intermediate buffers (the first layer of any net built from these blocks is
a Conv3x3, which never writes to its input).

Weight layout (fixed; the model file format depends on it):
  conv:  w has shape (9 * in_channels, out_channels); row r corresponds to
         patch offset (r // (3 * c_in), (r // c_in) % 3) and input channel
         r % c_in, i.e. the (3, 3, c_in) patch flattened row-major.
  dense: w has shape (in_dim, out_dim); flatten order is the row-major
         (H, W, C) order of the incoming feature map.
"""

import numpy as np

from .errors import ConfigError


def he_normal(rng, fan_in, shape, dtype):
    """He-style init: zero-mean normal with variance 2 / fan_in."""
    std = np.sqrt(2.0 / fan_in)
    return rng.normal(0.0, std, size=shape).astype(dtype)


class Conv3x3:
    """3x3 convolution, stride 1, zero padding 1 (spatial dims preserved)."""

    tag = "conv"

    def __init__(self, in_channels, out_channels, rng=None, dtype=np.float32,
                 needs_input_grad=True):
        self.in_channels = in_channels
        self.out_channels = out_channels
        shape = (9 * in_channels, out_channels)
        if rng is None:  # caller will load weights
            self.w = np.zeros(shape, dtype=dtype)
        else:
            self.w = he_normal(rng, 9 * in_channels, shape, dtype)
        self.b = np.zeros(out_channels, dtype=dtype)
        self.dw = None
        self.db = None
        # the first layer of a net can skip the input-gradient GEMM
        self.needs_input_grad = needs_input_grad
        self._cols = None
        self._x_shape = None
        self._xp = None  # padded scratch; its zero border persists across calls

    def forward(self, x):
        n, h, w, c = x.shape
        if c != self.in_channels:
            raise ConfigError(f"expected {self.in_channels} input channels, got {c}")
        if (self._xp is None or self._xp.shape != (n, h + 2, w + 2, c)
                or self._xp.dtype != x.dtype):
            self._xp = np.zeros((n, h + 2, w + 2, c), dtype=x.dtype)
        xp = self._xp
        xp[:, 1:h + 1, 1:w + 1, :] = x
        s = xp.strides
        view = np.lib.stride_tricks.as_strided(
            xp, (n, h, w, 3, 3, c), (s[0], s[1], s[2], s[1], s[2], s[3])
        )
        cols = view.reshape(n * h * w, 9 * c)  # gather copy; xp may be reused
        self._cols = cols
        self._x_shape = x.shape
        out = cols @ self.w
        out += self.b
        return out.reshape(n, h, w, self.out_channels)

    def backward(self, dout):
        n, h, w, _ = self._x_shape
        c = self.in_channels
        d2 = dout.reshape(n * h * w, self.out_channels)
        self.dw = self._cols.T @ d2
        self.db = d2.sum(axis=0)
        if not self.needs_input_grad:
            return None
        dcols = (d2 @ self.w.T).reshape(n, h, w, 3, 3, c)
        dxp = np.zeros((n, h + 2, w + 2, c), dtype=dout.dtype)
        for ki in range(3):
            for kj in range(3):
                dxp[:, ki:ki + h, kj:kj + w, :] += dcols[:, :, :, ki, kj, :]
        return dxp[:, 1:h + 1, 1:w + 1, :]

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]


class ReLU:
    """Rectifier. Works in place on the intermediate buffer it is given."""

    tag = "relu"

    def __init__(self):
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        np.multiply(x, self._mask, out=x)
        return x

    def backward(self, dout):
        np.multiply(dout, self._mask, out=dout)
        return dout

    def params(self):
        return []

    def grads(self):
        return []


class MaxPool2x2:
    """2x2 max pooling, stride 2. Ties route the gradient to the first max.

    Implemented as two pairwise maxima (rows then columns); the cached
    comparison masks replay the winner selection exactly in backward.
    """

    tag = "pool"

    def __init__(self):
        self._row_win = None
        self._col_win = None
        self._x_shape = None

    def forward(self, x):
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ConfigError(f"pooling needs even spatial dims, got {h}x{w}")
        a, b = x[:, 0::2], x[:, 1::2]
        self._row_win = a >= b
        m1 = np.maximum(a, b)  # (n, h/2, w, c)
        l, r = m1[:, :, 0::2], m1[:, :, 1::2]
        self._col_win = l >= r
        self._x_shape = x.shape
        return np.maximum(l, r)  # (n, h/2, w/2, c)

    def backward(self, dout):
        n, h, w, c = self._x_shape
        dm1 = np.zeros((n, h // 2, w, c), dtype=dout.dtype)
        dm1[:, :, 0::2] = dout * self._col_win
        dm1[:, :, 1::2] = dout * ~self._col_win
        dx = np.zeros((n, h, w, c), dtype=dout.dtype)
        dx[:, 0::2] = dm1 * self._row_win
        dx[:, 1::2] = dm1 * ~self._row_win
        return dx

    def params(self):
        return []

    def grads(self):
        return []


class Flatten:
    tag = "flatten"

    def __init__(self):
        self._x_shape = None

    def forward(self, x):
        self._x_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._x_shape)

    def params(self):
        return []

    def grads(self):
        return []


class Dense:
    tag = "dense"

    def __init__(self, in_dim, out_dim, rng=None, dtype=np.float32):
        self.in_dim = in_dim
        self.out_dim = out_dim
        if rng is None:  # caller will load weights
            self.w = np.zeros((in_dim, out_dim), dtype=dtype)
        else:
            self.w = he_normal(rng, in_dim, (in_dim, out_dim), dtype)
        self.b = np.zeros(out_dim, dtype=dtype)
        self.dw = None
        self.db = None
        self._x = None

    def forward(self, x):
        if x.shape[1] != self.in_dim:
            raise ConfigError(f"expected input dim {self.in_dim}, got {x.shape[1]}")
        self._x = x
        out = x @ self.w
        out += self.b
        return out

    def backward(self, dout):
        self.dw = self._x.T @ dout
        self.db = dout.sum(axis=0)
        return dout @ self.w.T

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.dw, self.db]


def softmax(logits):
    """Row-wise softmax, numerically stable, accumulated in 64-bit."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits, labels):
    """Mean cross-entropy of integer labels, via logsumexp (no log(0))."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    true = z[np.arange(z.shape[0]), labels]
    return float(np.mean(lse - true))


def cross_entropy_grad(logits, labels):
    """d(mean cross-entropy)/d(logits) = (softmax - onehot) / N."""
    n = logits.shape[0]
    g = softmax(logits)
    g[np.arange(n), labels] -= 1.0
    return g / n
