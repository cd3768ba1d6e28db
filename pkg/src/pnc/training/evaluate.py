"""Evaluation of trained models across kept-channel prefixes and subsets."""

import numpy as np

from pnc.errors import ConfigError


def _chunks(n, size=256):
    for i in range(0, n, size):
        yield slice(i, min(i + size, n))


def predict_proba_with_channels(model, teacher, images, channels):
    """Teacher probabilities on reconstructions using a channel subset.

    ``channels`` is an iterable of 1-based channel indices to keep; all other
    bottleneck channels are zeroed. An empty subset classifies the decode of
    an all-zero latent.
    """
    channels = sorted(set(channels))
    m = model.latent_channels
    if channels and (channels[0] < 1 or channels[-1] > m):
        raise ConfigError(f"channel indices must lie in 1..{m}, got {channels}")
    keep_idx = np.array([c - 1 for c in channels], dtype=int)
    out = []
    for sl in _chunks(len(images)):
        z = model.encode(images[sl])
        masked = np.zeros_like(z)
        if len(keep_idx):
            masked[:, keep_idx] = z[:, keep_idx]
        recon = model.decode(masked)
        out.append(teacher.predict_proba(recon))
    return np.concatenate(out, axis=0)


def prefix_accuracy_curve(model, teacher, images, labels):
    """Top-1 accuracy for every kept prefix length 0..latent_channels."""
    accs = []
    for keep in range(model.latent_channels + 1):
        probs = predict_proba_with_channels(model, teacher, images,
                                            range(1, keep + 1))
        accs.append(float((probs.argmax(axis=1) == labels).mean()))
    return accs


def prefix_mse_curve(model, images):
    """Reconstruction MSE for every kept prefix length 1..latent_channels."""
    curve = []
    for keep in range(1, model.latent_channels + 1):
        total = 0.0
        for sl in _chunks(len(images)):
            recon = model.forward(images[sl], keep)
            resid = recon - images[sl]
            total += float((resid * resid).sum())
        curve.append(total / images.size)
    return curve


def subset_accuracy(model, teacher, images, labels, channels):
    probs = predict_proba_with_channels(model, teacher, images, channels)
    return float((probs.argmax(axis=1) == labels).mean())


def all_subset_accuracies(model, teacher, images, labels):
    """Exhaustive accuracy per channel subset; practical for small widths."""
    from itertools import combinations
    m = model.latent_channels
    results = {}
    for size in range(m + 1):
        for combo in combinations(range(1, m + 1), size):
            results[combo] = subset_accuracy(model, teacher, images, labels, combo)
    return results
