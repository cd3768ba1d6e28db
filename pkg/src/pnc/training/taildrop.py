"""Stochastic taildrop: random tail lengths and the averaged-gradient step.

Each optimizer step draws one tail length per bottleneck channel, evaluates
the loss gradient with the corresponding prefix kept, and averages the
per-draw gradients before updating. Repeated draws of the same prefix reuse
the first evaluation; the result is bit-identical to recomputing because the
loss functions are deterministic in (parameters, batch, prefix).
"""

from dataclasses import dataclass

import numpy as np

from pnc.errors import ConfigError


@dataclass(frozen=True)
class TaildropConfig:
    """Distribution of the dropped tail length over {0, ..., num_channels-1}."""

    num_channels: int
    tail_probs: tuple

    def __post_init__(self):
        if self.num_channels < 1:
            raise ConfigError("num_channels must be >= 1")
        probs = np.asarray(self.tail_probs, dtype=np.float64)
        if probs.shape != (self.num_channels,):
            raise ConfigError(
                f"tail_probs must have length {self.num_channels}, got {probs.shape}")
        if np.any(probs < 0.0):
            raise ConfigError("tail probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ConfigError(f"tail probabilities sum to {probs.sum()!r}, not 1")

    @classmethod
    def uniform(cls, num_channels: int) -> "TaildropConfig":
        return cls(num_channels, tuple([1.0 / num_channels] * num_channels))

    @classmethod
    def point_mass(cls, num_channels: int, drop_length: int = 0) -> "TaildropConfig":
        probs = [0.0] * num_channels
        probs[drop_length] = 1.0
        return cls(num_channels, tuple(probs))


def sample_tail_length(config: TaildropConfig, rng: np.random.Generator) -> int:
    """Draw a tail length; the kept prefix is always at least one channel."""
    return int(rng.choice(config.num_channels, p=np.asarray(config.tail_probs)))


def averaged_taildrop_gradient(model, batch, config, rng, loss_fn):
    """One inner loop of the iterative multi-prefix optimization.

    Draws num_channels tail lengths, evaluates loss_fn(model, batch, keep)
    per draw (memoized per distinct prefix), and returns the per-draw kept
    prefixes, mean loss per prefix, and the averaged gradient.
    """
    m = config.num_channels
    draws = [sample_tail_length(config, rng) for _ in range(m)]
    cache = {}
    gsum = None
    loss_by_keep = {}
    for tail in draws:
        keep = m - tail
        if keep not in cache:
            cache[keep] = loss_fn(model, batch, keep)
        loss, grads = cache[keep]
        loss_by_keep.setdefault(keep, []).append(loss)
        if gsum is None:
            gsum = {name: g.copy() for name, g in grads.items()}
        else:
            for name in gsum:
                gsum[name] += grads[name]
    gbar = {name: g / m for name, g in gsum.items()}
    mean_loss = {keep: float(np.mean(vals)) for keep, vals in loss_by_keep.items()}
    kept = [m - tail for tail in draws]
    return kept, mean_loss, gbar
