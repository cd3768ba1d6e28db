"""Finite-difference verification of analytic gradients.

Central differences are only valid away from activation kinks (relu at 0,
clip at its bounds): a pre-activation within the probe step of a kink makes
the numeric derivative straddle two regimes. min_kink_distance measures that
margin so checks can assert they are in the valid regime.
"""

import numpy as np


def relative_gradient_error(loss_fn, params: dict[str, np.ndarray],
                            analytic: dict[str, np.ndarray],
                            eps: float = 1e-5) -> float:
    """Max of |analytic - numeric| / max(1, |numeric|) over every entry.

    loss_fn() must recompute the scalar loss from the current parameter
    values; entries are perturbed in place with central differences.
    """
    worst = 0.0
    for name, p in params.items():
        flat = p.reshape(-1)
        a = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = loss_fn()
            flat[i] = orig - eps
            lo = loss_fn()
            flat[i] = orig
            numeric = (hi - lo) / (2.0 * eps)
            err = abs(a[i] - numeric) / max(1.0, abs(numeric))
            worst = max(worst, err)
    return worst


def min_kink_distance(*networks) -> float:
    """Smallest distance of any cached pre-activation from an activation kink.

    Call after a forward pass; layers with linear activation contribute
    nothing. Pass every network involved in the loss.
    """
    dist = np.inf
    for network in networks:
        for layer in network.layers:
            cache = layer._cache
            if cache is None or layer.activation == "none":
                continue
            z = cache[2] if len(cache) == 4 else cache[1]
            if layer.activation == "relu":
                dist = min(dist, float(np.abs(z).min()))
            elif layer.activation == "clip":
                lo, hi = layer.clip_range
                dist = min(dist, float(np.abs(z - lo).min()),
                           float(np.abs(z - hi).min()))
    return dist


def input_gradient_error(loss_fn, x: np.ndarray, analytic: np.ndarray,
                         eps: float = 1e-5) -> float:
    """Same check for the gradient w.r.t. an input tensor."""
    worst = 0.0
    flat = x.reshape(-1)
    a = analytic.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = loss_fn()
        flat[i] = orig - eps
        lo = loss_fn()
        flat[i] = orig
        numeric = (hi - lo) / (2.0 * eps)
        err = abs(a[i] - numeric) / max(1.0, abs(numeric))
        worst = max(worst, err)
    return worst
