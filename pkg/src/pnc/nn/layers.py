"""Neural network layers with hand-written forward and backward passes.

Everything runs in float64 numpy. Each layer caches what it needs for the
backward pass on the instance, so a layer (and any network built from layers)
belongs to exactly one training run at a time.
"""

import numpy as np

from pnc.errors import ConfigError, StateError

ACTIVATIONS = ("relu", "clip", "none")


def clip_by_value(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Elementwise clamp of x into [lo, hi]."""
    if not lo < hi:
        raise ConfigError(f"clip range must satisfy lo < hi, got [{lo}, {hi}]")
    return np.clip(x, lo, hi)


def clip_by_value_grad(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Gradient mask of the clamp: 1 inside [lo, hi] (boundary inside), 0 outside."""
    return ((x >= lo) & (x <= hi)).astype(x.dtype)


def _apply_activation(kind, z, clip_range):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "clip":
        return clip_by_value(z, *clip_range)
    return z


def _activation_grad(kind, z, grad, clip_range):
    if kind == "relu":
        return grad * (z > 0.0)
    if kind == "clip":
        return grad * clip_by_value_grad(z, *clip_range)
    return grad


class Layer:
    """Base layer: owns parameters, their gradient buffers, and a forward cache."""

    def __init__(self, activation: str = "none", clip_range=(0.0, 1.0)):
        if activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {activation!r}")
        self.activation = activation
        self.clip_range = clip_range
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def init_params(self, rng: np.random.Generator) -> None:
        """Uniform fan-in initialization; layers without parameters do nothing."""

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray, accumulate: bool = True) -> np.ndarray:
        """Return grad w.r.t. the input; optionally accumulate parameter grads."""
        raise NotImplementedError

    def zero_grad(self) -> None:
        for g in self.grads.values():
            g.fill(0.0)

    def _require_cache(self):
        if self._cache is None:
            raise StateError(f"{type(self).__name__}.backward called before forward")
        return self._cache

    def _alloc_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    @staticmethod
    def _uniform(rng, shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)


class Dense(Layer):
    """Fully connected layer on (batch, in_features) inputs."""

    def __init__(self, in_features, out_features, activation="none", bias=True,
                 clip_range=(0.0, 1.0)):
        super().__init__(activation, clip_range)
        self.in_features = in_features
        self.out_features = out_features
        self.use_bias = bias
        self.params["weight"] = np.zeros((out_features, in_features))
        if bias:
            self.params["bias"] = np.zeros(out_features)
        self._alloc_grads()

    def init_params(self, rng):
        self.params["weight"][:] = self._uniform(
            rng, (self.out_features, self.in_features), self.in_features)
        if self.use_bias:
            center = 0.5 * sum(self.clip_range) if self.activation == "clip" else 0.0
            self.params["bias"].fill(center)

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ConfigError(
                f"Dense expects (batch, {self.in_features}), got {x.shape}")
        z = x @ self.params["weight"].T
        if self.use_bias:
            z = z + self.params["bias"]
        self._cache = (x, z)
        return _apply_activation(self.activation, z, self.clip_range)

    def backward(self, grad_out, accumulate=True):
        x, z = self._require_cache()
        dz = _activation_grad(self.activation, z, grad_out, self.clip_range)
        if accumulate:
            self.grads["weight"] += dz.T @ x
            if self.use_bias:
                self.grads["bias"] += dz.sum(axis=0)
        return dz @ self.params["weight"]


def _conv_out_size(size, kernel, stride, pad):
    return (size + 2 * pad - kernel) // stride + 1


def _im2col(xpad, kernel, stride, oh, ow):
    n, c = xpad.shape[:2]
    cols = np.empty((n, c, kernel, kernel, oh, ow), dtype=xpad.dtype)
    for ki in range(kernel):
        for kj in range(kernel):
            cols[:, :, ki, kj] = xpad[:, :, ki:ki + stride * oh:stride,
                                      kj:kj + stride * ow:stride]
    return cols.reshape(n, c * kernel * kernel, oh * ow)


def _col2im(dcols, xpad_shape, kernel, stride, oh, ow):
    n, c = xpad_shape[:2]
    dxpad = np.zeros(xpad_shape, dtype=dcols.dtype)
    dcols = dcols.reshape(n, c, kernel, kernel, oh, ow)
    for ki in range(kernel):
        for kj in range(kernel):
            dxpad[:, :, ki:ki + stride * oh:stride,
                  kj:kj + stride * ow:stride] += dcols[:, :, ki, kj]
    return dxpad


class Conv2d(Layer):
    """2D convolution on (batch, channels, height, width), zero padding k//2."""

    def __init__(self, in_channels, out_channels, kernel=3, stride=1,
                 activation="none", clip_range=(0.0, 1.0)):
        if kernel <= 0 or kernel % 2 == 0:
            raise ConfigError(f"kernel size must be positive and odd, got {kernel}")
        super().__init__(activation, clip_range)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.pad = kernel // 2
        self.params["weight"] = np.zeros((out_channels, in_channels * kernel * kernel))
        self.params["bias"] = np.zeros(out_channels)
        self._alloc_grads()

    def init_params(self, rng):
        fan_in = self.in_channels * self.kernel * self.kernel
        self.params["weight"][:] = self._uniform(
            rng, (self.out_channels, fan_in), fan_in)
        center = 0.5 * sum(self.clip_range) if self.activation == "clip" else 0.0
        self.params["bias"].fill(center)

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ConfigError(
                f"Conv2d expects (batch, {self.in_channels}, h, w), got {x.shape}")
        n, _, h, w = x.shape
        oh = _conv_out_size(h, self.kernel, self.stride, self.pad)
        ow = _conv_out_size(w, self.kernel, self.stride, self.pad)
        xpad = np.pad(x, ((0, 0), (0, 0), (self.pad, self.pad), (self.pad, self.pad)))
        cols = _im2col(xpad, self.kernel, self.stride, oh, ow)
        z = np.matmul(self.params["weight"], cols)
        z += self.params["bias"][:, None]
        z = z.reshape(n, self.out_channels, oh, ow)
        self._cache = (xpad.shape, cols, z, (h, w, oh, ow))
        return _apply_activation(self.activation, z, self.clip_range)

    def backward(self, grad_out, accumulate=True):
        xpad_shape, cols, z, (h, w, oh, ow) = self._require_cache()
        n = grad_out.shape[0]
        dz = _activation_grad(self.activation, z, grad_out, self.clip_range)
        dz = dz.reshape(n, self.out_channels, oh * ow)
        if accumulate:
            self.grads["weight"] += np.matmul(dz, cols.transpose(0, 2, 1)).sum(axis=0)
            self.grads["bias"] += dz.sum(axis=(0, 2))
        dcols = np.matmul(self.params["weight"].T, dz)
        dxpad = _col2im(dcols, xpad_shape, self.kernel, self.stride, oh, ow)
        if self.pad:
            return dxpad[:, :, self.pad:self.pad + h, self.pad:self.pad + w]
        return dxpad


class UpsampleConv2d(Conv2d):
    """Nearest-neighbor 2x upsample followed by a stride-1 convolution."""

    def __init__(self, in_channels, out_channels, kernel=3, activation="none",
                 clip_range=(0.0, 1.0)):
        super().__init__(in_channels, out_channels, kernel, stride=1,
                         activation=activation, clip_range=clip_range)

    def forward(self, x):
        up = x.repeat(2, axis=2).repeat(2, axis=3)
        return super().forward(up)

    def backward(self, grad_out, accumulate=True):
        dup = super().backward(grad_out, accumulate)
        n, c, h2, w2 = dup.shape
        # gradient of nearest-neighbor upsample: sum each 2x2 block
        return dup.reshape(n, c, h2 // 2, 2, w2 // 2, 2).sum(axis=(3, 5))


class Flatten(Layer):
    """Reshape (batch, ...) to (batch, features)."""

    def forward(self, x):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out, accumulate=True):
        return grad_out.reshape(self._require_cache())


class Network:
    """A plain sequence of layers with forward/backward and named parameters."""

    def __init__(self, layers: list[Layer]):
        self.layers = layers

    def init_params(self, rng: np.random.Generator) -> None:
        for layer in self.layers:
            layer.init_params(rng)

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        if not np.all(np.isfinite(x)):
            raise ArithmeticError("non-finite values in forward output")
        return x

    def backward(self, grad_out: np.ndarray, accumulate: bool = True) -> np.ndarray:
        for layer in reversed(self.layers):
            grad_out = layer.backward(grad_out, accumulate)
        if not np.all(np.isfinite(grad_out)):
            raise ArithmeticError("non-finite values in backward gradient")
        return grad_out

    def zero_grad(self) -> None:
        for layer in self.layers:
            layer.zero_grad()

    def named_params(self, prefix: str = "") -> dict[str, np.ndarray]:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, value in layer.params.items():
                out[f"{prefix}{i}.{name}"] = value
        return out

    def named_grads(self, prefix: str = "") -> dict[str, np.ndarray]:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, value in layer.grads.items():
                out[f"{prefix}{i}.{name}"] = value
        return out
