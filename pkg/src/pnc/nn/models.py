"""Model compositions: rateless autoencoder and the small classifier.

The autoencoder wires an encoder network and a decoder network around a
bottleneck whose channels carry decreasing importance. Keeping only the
first ``keep`` channels zero-fills the rest before decoding, which is the
same view of the latent the receiving side reconstructs from a partial
transmission.
"""

import numpy as np

from pnc.errors import ConfigError
from pnc.nn.layers import Conv2d, Dense, Flatten, Network, UpsampleConv2d


class Autoencoder:
    """Encoder + channel-ordered bottleneck + decoder."""

    def __init__(self, encoder: Network, decoder: Network, latent_channels: int):
        self.encoder = encoder
        self.decoder = decoder
        self.latent_channels = latent_channels
        self._keep_mask = None

    def init_params(self, rng):
        self.encoder.init_params(rng)
        self.decoder.init_params(rng)

    def encode(self, x):
        z = self.encoder.forward(x)
        if z.shape[1] != self.latent_channels:
            raise ConfigError(
                f"encoder produced {z.shape[1]} channels, expected {self.latent_channels}")
        return z

    def decode(self, z):
        return self.decoder.forward(z)

    def forward(self, x, keep=None):
        """Full pass; with ``keep`` given, channels keep+1..M are zeroed before decoding."""
        z = self.encode(x)
        if keep is not None:
            if not 1 <= keep <= self.latent_channels:
                raise ConfigError(
                    f"keep must be in 1..{self.latent_channels}, got {keep}")
            z = z.copy()
            z[:, keep:] = 0.0
        self._keep_mask = keep
        return self.decoder.forward(z)

    def backward(self, grad_out, accumulate=True):
        dz = self.decoder.backward(grad_out, accumulate)
        if self._keep_mask is not None:
            dz = dz.copy()
            dz[:, self._keep_mask:] = 0.0
        return self.encoder.backward(dz, accumulate)

    def zero_grad(self):
        self.encoder.zero_grad()
        self.decoder.zero_grad()

    def named_params(self):
        out = self.encoder.named_params("encoder.")
        out.update(self.decoder.named_params("decoder."))
        return out

    def named_grads(self):
        out = self.encoder.named_grads("encoder.")
        out.update(self.decoder.named_grads("decoder."))
        return out


class Classifier:
    """Feed-forward classifier producing class probabilities via softmax."""

    def __init__(self, network: Network, n_classes: int):
        self.network = network
        self.n_classes = n_classes

    def init_params(self, rng):
        self.network.init_params(rng)

    def forward_logits(self, x):
        return self.network.forward(x)

    def predict_proba(self, x):
        return softmax(self.forward_logits(x))

    def backward_input(self, grad_logits, accumulate=False):
        """Gradient w.r.t. the input; by default parameter grads stay untouched."""
        return self.network.backward(grad_logits, accumulate)

    def zero_grad(self):
        self.network.zero_grad()

    def named_params(self):
        return self.network.named_params("classifier.")

    def named_grads(self):
        return self.network.named_grads("classifier.")


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def build_autoencoder(image_size=32, in_channels=1, latent_channels=8,
                      seed=0) -> Autoencoder:
    """Convolutional autoencoder: 2 stride-2 encoder convs, 5 decoder layers.

    image_size must be divisible by 4; the bottleneck is
    (latent_channels, image_size/4, image_size/4) and clipped to [0, 1] so it
    can be quantized directly.
    """
    if image_size % 4 != 0:
        raise ConfigError(f"image_size must be divisible by 4, got {image_size}")
    encoder = Network([
        Conv2d(in_channels, 8, kernel=3, stride=2, activation="relu"),
        Conv2d(8, latent_channels, kernel=3, stride=2, activation="clip"),
    ])
    decoder = Network([
        Conv2d(latent_channels, 16, kernel=3, stride=1, activation="relu"),
        UpsampleConv2d(16, 8, kernel=3, activation="relu"),
        Conv2d(8, 8, kernel=3, stride=1, activation="relu"),
        UpsampleConv2d(8, 4, kernel=3, activation="relu"),
        Conv2d(4, in_channels, kernel=3, stride=1, activation="clip"),
    ])
    model = Autoencoder(encoder, decoder, latent_channels)
    model.init_params(np.random.default_rng(seed))
    return model


def build_linear_autoencoder(dim, latent_channels, seed=0) -> Autoencoder:
    """Bias-free single-dense-layer autoencoder, no activations."""
    encoder = Network([Dense(dim, latent_channels, activation="none", bias=False)])
    decoder = Network([Dense(latent_channels, dim, activation="none", bias=False)])
    model = Autoencoder(encoder, decoder, latent_channels)
    model.init_params(np.random.default_rng(seed))
    return model


def build_classifier(image_size=32, in_channels=1, n_classes=10, seed=0) -> Classifier:
    feat = image_size // 4
    network = Network([
        Conv2d(in_channels, 8, kernel=3, stride=2, activation="relu"),
        Conv2d(8, 16, kernel=3, stride=2, activation="relu"),
        Flatten(),
        Dense(16 * feat * feat, 48, activation="relu"),
        Dense(48, n_classes, activation="none"),
    ])
    model = Classifier(network, n_classes)
    model.init_params(np.random.default_rng(seed))
    return model
