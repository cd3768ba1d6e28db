"""Dataset handling: procedural shape/texture classes and raw-image ingest.

The synthetic generator renders one of ten parameterized patterns per class:
four coarse shapes (disk, ring, square, frame) plus six textures that differ
only in orientation or spatial frequency (coarse/fine stripe pairs, fine
checkerboard, diagonal grating), with jittered geometry and additive
Gaussian noise. The texture pairs need fine spatial detail to separate, so
classification quality degrades gracefully as fewer latent channels arrive.
Classes are balanced within one sample and splits are disjoint; everything
is a pure function of the seed.
"""

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from pnc.errors import ConfigError

SPLITS = ("train_ae", "val", "test")


@dataclass(frozen=True)
class DatasetConfig:
    n_classes: int = 10
    image_size: int = 32
    in_channels: int = 1
    counts: tuple = (("train_ae", 2000), ("val", 500), ("test", 500))
    noise: float = 0.1

    def __post_init__(self):
        if not 2 <= self.n_classes <= 10:
            raise ConfigError("n_classes must be between 2 and 10")
        if dict(self.counts).keys() != set(SPLITS):
            raise ConfigError(f"counts must cover exactly the splits {SPLITS}")
        if self.noise < 0.0:
            raise ConfigError("noise must be >= 0")


@dataclass
class Dataset:
    images: np.ndarray          # (N, C, H, W) in [0, 1]
    labels: np.ndarray          # (N,) int
    splits: dict = field(default_factory=dict)   # name -> index array
    n_classes: int = 10

    def split(self, name):
        idx = self.splits[name]
        return self.images[idx], self.labels[idx]

    def split_ids(self, name):
        return set(self.splits[name].tolist())


def _render_pattern(canvas, cls, rng, size):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cy = size / 2 + rng.uniform(-4, 4)
    cx = size / 2 + rng.uniform(-4, 4)
    r = np.hypot(yy - cy, xx - cx)
    if cls == 0:                      # filled disk
        mask = r <= rng.uniform(6, 10)
    elif cls == 1:                    # ring
        outer = rng.uniform(8, 11)
        mask = (r <= outer) & (r >= outer - rng.uniform(2.0, 3.5))
    elif cls == 2:                    # filled square
        half = rng.uniform(5, 8)
        mask = (np.abs(yy - cy) <= half) & (np.abs(xx - cx) <= half)
    elif cls == 3:                    # square frame
        half = rng.uniform(7, 10)
        d = np.maximum(np.abs(yy - cy), np.abs(xx - cx))
        mask = (d <= half) & (d >= half - 2.5)
    elif cls == 4:                    # fine horizontal stripes
        period = rng.uniform(3.0, 4.0)
        mask = ((yy + rng.uniform(0, period)) % period) < period / 2
    elif cls == 5:                    # coarse horizontal stripes
        period = rng.uniform(6.5, 8.0)
        mask = ((yy + rng.uniform(0, period)) % period) < period / 2
    elif cls == 6:                    # fine vertical stripes
        period = rng.uniform(3.0, 4.0)
        mask = ((xx + rng.uniform(0, period)) % period) < period / 2
    elif cls == 7:                    # coarse vertical stripes
        period = rng.uniform(6.5, 8.0)
        mask = ((xx + rng.uniform(0, period)) % period) < period / 2
    elif cls == 8:                    # fine checkerboard
        cell = rng.uniform(2.5, 3.5)
        phase = rng.uniform(0, cell)
        mask = (((yy + phase) // cell) + ((xx + phase) // cell)) % 2 == 0
    else:                             # diagonal grating
        period = rng.uniform(4.0, 6.0)
        mask = ((xx + yy + rng.uniform(0, period)) % period) < period / 2
    canvas[mask] = rng.uniform(0.6, 1.0)
    return canvas


def generate_synthetic_dataset(config: DatasetConfig = DatasetConfig(),
                               seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    counts = dict(config.counts)
    total = sum(counts.values())
    size = config.image_size
    labels = np.array([i % config.n_classes for i in range(total)], dtype=int)
    images = np.empty((total, config.in_channels, size, size), dtype=np.float64)
    for i in range(total):
        canvas = np.full((size, size), rng.uniform(0.0, 0.2))
        canvas = _render_pattern(canvas, int(labels[i]), rng, size)
        if config.noise > 0.0:
            canvas = canvas + rng.normal(0.0, config.noise, canvas.shape)
        images[i] = np.clip(canvas, 0.0, 1.0)

    order = rng.permutation(total)
    splits = {}
    start = 0
    for name in SPLITS:
        splits[name] = np.sort(order[start:start + counts[name]])
        start += counts[name]
    return Dataset(images=images, labels=labels, splits=splits,
                   n_classes=config.n_classes)


def save_dataset(path, dataset: Dataset) -> None:
    np.savez(path, images=dataset.images, labels=dataset.labels,
             n_classes=dataset.n_classes,
             **{f"split_{k}": v for k, v in dataset.splits.items()})


def load_dataset(path) -> Dataset:
    with np.load(path) as doc:
        splits = {k[len("split_"):]: doc[k] for k in doc.files
                  if k.startswith("split_")}
        return Dataset(images=doc["images"], labels=doc["labels"],
                       splits=splits, n_classes=int(doc["n_classes"]))


def _read_pnm(path):
    """Minimal PGM/PPM reader (P2, P3, P5, P6); returns (H, W, C) floats in [0,1]."""
    with open(path, "rb") as fh:
        data = fh.read()

    tokens = []
    pos = 0
    while len(tokens) < 4 and pos < len(data):
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] not in b"\n":
                pos += 1
        elif data[pos] in b" \t\r\n":
            pos += 1
        else:
            start = pos
            while pos < len(data) and data[pos] not in b" \t\r\n#":
                pos += 1
            tokens.append(data[start:pos])
    magic = tokens[0].decode("ascii")
    if magic not in ("P2", "P3", "P5", "P6"):
        raise ConfigError(f"unsupported image format {magic!r} in {path}")
    width, height, maxval = (int(t) for t in tokens[1:4])
    channels = 3 if magic in ("P3", "P6") else 1
    n = width * height * channels
    if magic in ("P5", "P6"):
        body = data[pos + 1:pos + 1 + n]
        if len(body) < n:
            raise ConfigError(f"truncated pixel data in {path}")
        pixels = np.frombuffer(body, dtype=np.uint8).astype(np.float64)
    else:
        values = data[pos:].split()
        if len(values) < n:
            raise ConfigError(f"truncated pixel data in {path}")
        pixels = np.array([int(v) for v in values[:n]], dtype=np.float64)
    return pixels.reshape(height, width, channels) / maxval


def _resize_nearest(img, size):
    h, w = img.shape[:2]
    rows = (np.arange(size) * h // size).clip(0, h - 1)
    cols = (np.arange(size) * w // size).clip(0, w - 1)
    return img[rows][:, cols]


def ingest_raw_dataset(manifest_path, image_size=32, in_channels=1,
                       n_classes=10, split="test"):
    """Load (file, label) pairs listed in a manifest CSV into a Dataset.

    Unreadable files and out-of-range labels are collected into the returned
    error report; duplicates are dropped with a warning entry. All images in
    the resulting dataset land in one split.
    """
    base = os.path.dirname(os.path.abspath(manifest_path))
    entries = []
    errors = []
    seen = set()
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            name, label = row[0].strip(), row[1].strip()
            if name in seen:
                errors.append((name, "duplicate entry ignored"))
                continue
            seen.add(name)
            entries.append((name, label))

    images, labels = [], []
    for name, label_text in entries:
        try:
            label = int(label_text)
            if not 0 <= label < n_classes:
                raise ConfigError(f"label {label} outside 0..{n_classes - 1}")
            img = _read_pnm(os.path.join(base, name))
            img = _resize_nearest(img, image_size)
            if in_channels == 1 and img.shape[2] == 3:
                img = img.mean(axis=2, keepdims=True)
            elif in_channels == 3 and img.shape[2] == 1:
                img = np.repeat(img, 3, axis=2)
            images.append(np.transpose(img, (2, 0, 1)))
            labels.append(label)
        except (OSError, ValueError, ConfigError) as exc:
            errors.append((name, str(exc)))

    if images:
        stacked = np.stack(images)
        label_arr = np.array(labels, dtype=int)
    else:
        stacked = np.empty((0, in_channels, image_size, image_size))
        label_arr = np.empty((0,), dtype=int)
    splits = {name: np.empty((0,), dtype=int) for name in SPLITS}
    splits[split] = np.arange(len(images))
    return Dataset(images=stacked, labels=label_arr, splits=splits,
                   n_classes=n_classes), errors
