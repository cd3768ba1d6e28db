"""Training loops: two-stage autoencoder schedule, teacher, fixed-rate baseline."""

import csv
from dataclasses import dataclass

import numpy as np

from pnc.errors import ConfigError, ConvergenceError
from pnc.nn.adam import Adam
from pnc.nn.models import build_autoencoder, build_classifier
from pnc.training.losses import (cross_entropy_hard, loss_distill,
                                 loss_reconstruction)
from pnc.training.taildrop import TaildropConfig, averaged_taildrop_gradient

STAGES = ("pretrain", "distill")


@dataclass(frozen=True)
class StageConfig:
    stage: str
    learning_rate: float
    batch_size: int
    epochs: int

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ConfigError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("batch_size and epochs must be >= 1")


def _batch_indices(n, batch_size, rng):
    order = rng.permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def predict_proba_batched(classifier, x, chunk=256):
    parts = [classifier.predict_proba(x[i:i + chunk]) for i in range(0, len(x), chunk)]
    return np.concatenate(parts, axis=0)


def train_epoch(model, images, taildrop: TaildropConfig, stage: StageConfig,
                adam: Adam, rng, teacher=None, soft_labels=None, epoch=0):
    """One pass over the data; one averaged-gradient optimizer step per batch.

    Returns stat rows {epoch, stage, kept_channels, loss} with the mean loss
    per kept-prefix bucket across the epoch.
    """
    if len(images) == 0:
        raise ConfigError("training dataset is empty")
    if stage.stage == "distill" and teacher is None:
        raise ConfigError("distillation requires a teacher")

    bucket_losses = {}
    for idx in _batch_indices(len(images), stage.batch_size, rng):
        batch = images[idx]
        if stage.stage == "pretrain":
            loss_fn = loss_reconstruction
        else:
            labels = soft_labels[idx] if soft_labels is not None else None

            def loss_fn(m, b, keep, _labels=labels):
                return loss_distill(m, teacher, b, keep, soft_labels=_labels)

        _, mean_loss, gbar = averaged_taildrop_gradient(
            model, batch, taildrop, rng, loss_fn)
        adam.step(model.named_params(), gbar)
        for keep, value in mean_loss.items():
            bucket_losses.setdefault(keep, []).append(value)

    return [
        {"epoch": epoch, "stage": stage.stage, "kept_channels": keep,
         "loss": float(np.mean(vals))}
        for keep, vals in sorted(bucket_losses.items())
    ]


def train_stage(model, images, taildrop: TaildropConfig, stage: StageConfig,
                seed: int, teacher=None):
    """Run one stage for its configured epoch count with a fresh optimizer."""
    rng = np.random.default_rng(seed)
    adam = Adam(model.named_params(), stage.learning_rate)
    soft_labels = None
    if stage.stage == "distill":
        if teacher is None:
            raise ConfigError("distillation requires a teacher")
        soft_labels = predict_proba_batched(teacher, images)
    rows = []
    for epoch in range(stage.epochs):
        epoch_rows = train_epoch(model, images, taildrop, stage, adam, rng,
                                 teacher=teacher, soft_labels=soft_labels,
                                 epoch=epoch)
        if stage.stage == "distill":
            # teacher agreement at the full prefix: the trainer never sees
            # ground truth, so this is its accuracy analogue
            agreement = _teacher_agreement(model, teacher, images, soft_labels)
            for row in epoch_rows:
                row["accuracy"] = agreement
        rows.extend(epoch_rows)
    return rows


def _teacher_agreement(model, teacher, images, soft_labels, sample=128):
    recon = model.forward(images[:sample], keep=model.latent_channels)
    preds = teacher.predict_proba(recon).argmax(axis=1)
    return float((preds == soft_labels[:sample].argmax(axis=1)).mean())


def train_autoencoder(images, taildrop: TaildropConfig, stages, seed: int,
                      teacher=None, image_size=32, in_channels=1, model=None):
    """Build (or reuse) an autoencoder and run the staged schedule on it."""
    if model is None:
        model = build_autoencoder(image_size, in_channels,
                                  taildrop.num_channels, seed=seed)
    rows = []
    for i, stage in enumerate(stages):
        rows.extend(train_stage(model, images, taildrop, stage,
                                seed=seed + i + 1, teacher=teacher))
    return model, rows


def train_fixed_rate(images, k_fixed, stages, seed, teacher=None,
                     image_size=32, in_channels=1):
    """Baseline without taildrop: bottleneck width k_fixed, full prefix always
    kept (point mass at tail length zero), otherwise the identical schedule."""
    taildrop = TaildropConfig.point_mass(k_fixed, drop_length=0)
    return train_autoencoder(images, taildrop, stages, seed, teacher=teacher,
                             image_size=image_size, in_channels=in_channels)


def train_teacher(images, labels, n_classes, learning_rate=0.002, batch_size=32,
                  max_epochs=60, target_accuracy=0.95, seed=0,
                  image_size=32, in_channels=1):
    """Train the classifier until it reaches target train accuracy.

    Raises ConvergenceError (carrying the final accuracy) if the target is
    not reached within max_epochs.
    """
    if len(images) == 0:
        raise ConfigError("teacher dataset is empty")
    model = build_classifier(image_size, in_channels, n_classes, seed=seed)
    rng = np.random.default_rng(seed)
    adam = Adam(model.named_params(), learning_rate)
    accuracy = 0.0
    for _ in range(max_epochs):
        for idx in _batch_indices(len(images), batch_size, rng):
            logits = model.forward_logits(images[idx])
            _, dlogits = cross_entropy_hard(logits, labels[idx])
            model.zero_grad()
            model.network.backward(dlogits, accumulate=True)
            adam.step(model.named_params(), model.named_grads())
        probs = predict_proba_batched(model, images)
        accuracy = float((probs.argmax(axis=1) == labels).mean())
        if accuracy >= target_accuracy:
            return model, accuracy
    raise ConvergenceError("teacher did not reach target accuracy", accuracy)


def write_metrics_csv(path, rows):
    """Per-epoch training metrics; accuracy is blank where not evaluated."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "stage", "kept_channels", "loss", "accuracy"])
        for row in rows:
            acc = row.get("accuracy")
            writer.writerow([row["epoch"], row["stage"], row["kept_channels"],
                             repr(row["loss"]), "" if acc is None else repr(acc)])
