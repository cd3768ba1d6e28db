"""Shared fixtures: trained desk-scale artifacts reused across test modules.

Training here is sized to keep the suite fast while leaving the learned
structure intact; the CLI defaults train longer on more data.
"""

import time

import numpy as np
import pytest

from pnc.codec.huffman import build_huffman_tables
from pnc.codec.quantizer import quantize_channel
from pnc.harness.dataset import DatasetConfig, generate_synthetic_dataset
from pnc.training.taildrop import TaildropConfig
from pnc.training.trainer import (StageConfig, train_autoencoder,
                                  train_fixed_rate, train_stage, train_teacher)

DESK_DATASET_SEED = 42
DESK_TEACHER_SEED = 1
DESK_MODEL_SEED = 7
DESK_LATENT_CHANNELS = 8

DESK_STAGES = [
    StageConfig("pretrain", 0.001, 32, 12),
    StageConfig("distill", 0.002, 32, 10),
]


def build_tables_for(model, images):
    corpus = {}
    for i in range(0, len(images), 256):
        z = model.encode(images[i:i + 256])
        for ch in range(z.shape[1]):
            corpus.setdefault(ch + 1, []).append(
                quantize_channel(z[:, ch].reshape(-1)))
    return build_huffman_tables(corpus)


@pytest.fixture(scope="session")
def desk_dataset():
    config = DatasetConfig(
        counts=(("train_ae", 512), ("val", 160), ("test", 320)), noise=0.12)
    return generate_synthetic_dataset(config, seed=DESK_DATASET_SEED)


@pytest.fixture(scope="session")
def desk(desk_dataset):
    """Teacher, taildrop model, fixed-rate baseline, and Huffman tables."""
    train_x, train_y = desk_dataset.split("train_ae")
    timings = {}

    t0 = time.perf_counter()
    teacher, teacher_acc = train_teacher(train_x, train_y,
                                         desk_dataset.n_classes,
                                         seed=DESK_TEACHER_SEED)
    timings["teacher"] = time.perf_counter() - t0

    # staged manually (same seeds train_autoencoder would use) to snapshot
    # the reconstruction-trained parameters before distillation reshapes them
    from pnc.nn.models import build_autoencoder
    taildrop = TaildropConfig.uniform(DESK_LATENT_CHANNELS)
    t0 = time.perf_counter()
    model = build_autoencoder(32, 1, DESK_LATENT_CHANNELS, seed=DESK_MODEL_SEED)
    train_rows = train_stage(model, train_x, taildrop, DESK_STAGES[0],
                             seed=DESK_MODEL_SEED + 1)
    pretrained_params = {k: v.copy() for k, v in model.named_params().items()}
    train_rows += train_stage(model, train_x, taildrop, DESK_STAGES[1],
                              seed=DESK_MODEL_SEED + 2, teacher=teacher)
    timings["autoencoder"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    fixed, _ = train_fixed_rate(train_x, DESK_LATENT_CHANNELS, DESK_STAGES,
                                seed=DESK_MODEL_SEED, teacher=teacher)
    timings["fixed_rate"] = time.perf_counter() - t0

    tables = build_tables_for(model, train_x)
    fixed_tables = build_tables_for(fixed, train_x)

    return {
        "dataset": desk_dataset,
        "teacher": teacher,
        "teacher_accuracy": teacher_acc,
        "model": model,
        "pretrained_params": pretrained_params,
        "train_rows": train_rows,
        "fixed": fixed,
        "tables": tables,
        "fixed_tables": fixed_tables,
        "timings": timings,
        "latent_channels": DESK_LATENT_CHANNELS,
    }


@pytest.fixture(scope="session")
def ordering_model(desk_dataset):
    """Narrow (6-channel) distilled model for exhaustive subset checks."""
    train_x, train_y = desk_dataset.split("train_ae")
    teacher, _ = train_teacher(train_x, train_y, desk_dataset.n_classes, seed=2)
    stages = [StageConfig("pretrain", 0.001, 32, 12),
              StageConfig("distill", 0.002, 32, 12)]
    model, _ = train_autoencoder(train_x, TaildropConfig.uniform(6), stages,
                                 seed=8, teacher=teacher)
    return {"model": model, "teacher": teacher, "dataset": desk_dataset}


@pytest.fixture(scope="session")
def tiny_sim_parts():
    """Untrained small model + tables: enough for protocol/simulator tests."""
    from pnc.nn.models import build_autoencoder, build_classifier
    rng = np.random.default_rng(0)
    model = build_autoencoder(16, 1, 4, seed=9)
    teacher = build_classifier(16, 1, 5, seed=10)
    images = rng.random((24, 1, 16, 16))
    labels = rng.integers(0, 5, 24)
    tables = build_tables_for(model, images)
    return {"model": model, "teacher": teacher, "images": images,
            "labels": labels, "tables": tables}
