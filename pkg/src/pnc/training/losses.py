"""Training objectives for the two stages: reconstruction and distillation."""

import numpy as np

from pnc.nn.models import log_softmax


def loss_reconstruction(model, batch, keep):
    """Mean squared error of the prefix-limited reconstruction.

    Returns (loss, grads) where grads is a fresh name->array dict covering
    the encoder and decoder.
    """
    out = model.forward(batch, keep)
    resid = out - batch
    loss = float(np.mean(resid * resid))
    model.zero_grad()
    model.backward(2.0 * resid / resid.size)
    return loss, {name: g.copy() for name, g in model.named_grads().items()}


def loss_distill(model, teacher, batch, keep, soft_labels=None):
    """Cross-entropy between the teacher's view of the input and of the
    prefix-limited reconstruction.

    The teacher stays frozen: its parameter gradient buffers are zeroed and
    never accumulated into; only the input gradient flows back into the
    autoencoder.
    """
    if soft_labels is None:
        soft_labels = teacher.predict_proba(batch)
    recon = model.forward(batch, keep)
    logits = teacher.forward_logits(recon)
    logq = log_softmax(logits)
    loss = float(np.mean(-(soft_labels * logq).sum(axis=1)))
    dlogits = (np.exp(logq) - soft_labels) / batch.shape[0]
    teacher.zero_grad()
    drecon = teacher.backward_input(dlogits, accumulate=False)
    model.zero_grad()
    model.backward(drecon)
    return loss, {name: g.copy() for name, g in model.named_grads().items()}


def cross_entropy_hard(logits, labels):
    """Mean cross-entropy against integer labels plus the logits gradient."""
    logq = log_softmax(logits)
    n = logits.shape[0]
    loss = float(-logq[np.arange(n), labels].mean())
    grad = np.exp(logq)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n
