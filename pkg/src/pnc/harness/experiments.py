"""Experiment drivers: accuracy-vs-size sweeps, scenario grids, varying runs.

Every driver emits CSV only; aggregate numbers are recomputable from the
per-image record files it writes alongside.
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

from pnc.codec.image_codec import EncodedImage, serialize_image
from pnc.errors import ConfigError
from pnc.harness.metrics import report_from_records, top_n_accuracy
from pnc.netsim.simulate import (SimConfig, encode_image_set, run_simulation,
                                 write_records_csv)
from pnc.netsim.trace import (ArrivalSchedule, ScenarioConfig,
                              build_scenario_trace)
from pnc.protocol.framing import truncate
from pnc.protocol.server import ReceivedImage, assemble_latent, \
    decode_channel_prefix


@dataclass(frozen=True)
class ExperimentGrid:
    scenarios: tuple = ("no_jamming", "light_jamming", "heavy_jamming")
    periods: tuple = (0.3, 0.5, 0.7)
    repetitions: int = 1
    base_seed: int = 0
    images_per_cell: int = 100
    base_rate: float = 1000.0

    def cells(self) -> list:
        """Fully enumerated (scenario, period, repetition, seed) cells."""
        out = []
        for scenario in self.scenarios:
            for period in self.periods:
                for rep in range(self.repetitions):
                    out.append({"scenario": scenario, "period": period,
                                "repetition": rep,
                                "seed": cell_seed(self.base_seed, rep)})
        return out


@dataclass
class Artifacts:
    """Trained pieces every experiment needs."""
    model: object
    teacher: object
    tables: dict
    images: np.ndarray
    labels: np.ndarray


def cell_seed(base_seed: int, repetition: int) -> int:
    """Image-sampling seed for one repetition; shared by grid and vary runs
    so a constant-pattern varying run reproduces its grid cell exactly."""
    return base_seed * 10007 + repetition


def _latent_geometry(model, images):
    z = model.encode(images[:1])
    return z.shape[1], z.shape[2], z.shape[3]


def sweep_accuracy_vs_size(artifacts: Artifacts, size_limits, top_n: int = 1):
    """Accuracy after truncating every encoded image to each byte limit.

    For each limit the encoded stream is cut, the decodable channel prefix
    recovered, the latent zero-filled, decoded, and classified. Returns rows
    of {size_limit, accuracy, mean_channels_used}.
    """
    model, teacher = artifacts.model, artifacts.teacher
    m, h, w = _latent_geometry(model, artifacts.images)
    encoded = encode_image_set(model, artifacts.tables, list(artifacts.images))
    serialized = [serialize_image(img) for img in encoded]
    rows = []
    for limit in size_limits:
        if limit < 0:
            raise ConfigError(f"size limit must be >= 0, got {limit}")
        latents = np.zeros((len(serialized), m, h, w))
        used = np.zeros(len(serialized))
        for i, data in enumerate(serialized):
            cut = truncate(data, limit)
            channels = decode_channel_prefix(cut, artifacts.tables, h * w)
            received = ReceivedImage(image_id=i, raw=cut, channels=channels)
            used[i] = received.channels_used
            latents[i] = assemble_latent(received, m, h, w)
        probs = _classify(model, teacher, latents)
        rows.append({
            "size_limit": limit,
            "accuracy": top_n_accuracy(probs, artifacts.labels, top_n),
            "mean_channels_used": float(used.mean()),
        })
    return rows


def _classify(model, teacher, latents, chunk=256):
    parts = []
    for i in range(0, len(latents), chunk):
        parts.append(teacher.predict_proba(model.decode(latents[i:i + chunk])))
    return np.concatenate(parts, axis=0)


def write_rows_csv(path, rows) -> None:
    if not rows:
        raise ConfigError("no rows to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _cell_images(artifacts, count, seed):
    """Seeded image subsequence for one cell, cycling when count exceeds it."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(artifacts.images))
    idx = np.array([order[i % len(order)] for i in range(count)])
    return idx


def run_grid(grid: ExperimentGrid, artifacts: Artifacts, out_dir,
             sim_config: SimConfig = SimConfig(), top_n: int = 1):
    """Run every grid cell; emit per-cell record CSVs and a summary CSV.

    A cell whose simulation fails is reported as an error row instead of
    aborting the rest of the grid.
    """
    os.makedirs(out_dir, exist_ok=True)
    cells = grid.cells()   # fully specified before any run starts
    try:
        encoded_cache = encode_image_set(artifacts.model, artifacts.tables,
                                         list(artifacts.images))
        cache_error = None
    except Exception as exc:
        encoded_cache, cache_error = None, str(exc)
    summary = []
    for cell in cells:
        name = (f"grid_{cell['scenario']}_{int(round(cell['period'] * 1000))}ms"
                f"_rep{cell['repetition']}")
        try:
            if cache_error is not None:
                raise ConfigError(cache_error)
            records = _run_cell(cell, grid, artifacts, sim_config, encoded_cache)
            write_records_csv(os.path.join(out_dir, name + ".csv"), records)
            report = report_from_records(records, top_n)
            row = {"scenario": cell["scenario"], "period": repr(cell["period"]),
                   "repetition": cell["repetition"], "error": ""}
            row.update(report.as_row())
        except Exception as exc:
            row = {"scenario": cell["scenario"], "period": repr(cell["period"]),
                   "repetition": cell["repetition"], "error": str(exc)}
        summary.append(row)
    fieldnames = ["scenario", "period", "repetition", "n_images", "top_n",
                  "accuracy", "fraction_fully_offloaded", "mean_throughput",
                  "mean_channels_used", "mean_bytes_delivered", "error"]
    path = os.path.join(out_dir, "grid_summary.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, restval="")
        writer.writeheader()
        for row in summary:
            writer.writerow(row)
    return summary


def _run_cell(cell, grid, artifacts, sim_config, encoded_cache):
    idx = _cell_images(artifacts, grid.images_per_cell, cell["seed"])
    images = artifacts.images[idx]
    labels = artifacts.labels[idx]
    encoded = [EncodedImage(i, encoded_cache[j].channels)
               for i, j in enumerate(idx)]
    schedule = ArrivalSchedule(period=cell["period"],
                               image_count=grid.images_per_cell)
    duration = schedule.arrival(grid.images_per_cell - 1) + \
        2 * cell["period"] + 1.0
    scenario = ScenarioConfig.single(cell["scenario"], grid.base_rate)
    trace = build_scenario_trace(scenario, duration)
    return run_simulation(artifacts.model, artifacts.teacher, artifacts.tables,
                          images, labels, trace, schedule, sim_config,
                          encoded=encoded)


def run_varying_scenario(artifacts: Artifacts, out_dir, period: float = 0.5,
                         image_count: int = 60, base_rate: float = 1000.0,
                         segment_duration: float = 10.0,
                         pattern=("no_jamming", "heavy_jamming"),
                         sim_config: SimConfig = SimConfig(), top_n: int = 1,
                         seed: int = 0, trace=None):
    """One run under a switching-bandwidth schedule; emits the per-image
    timeline (records CSV) plus an aggregate metrics CSV.

    An explicit ``trace`` overrides the scenario pattern entirely (e.g. one
    loaded from a trace CSV); it must cover the schedule."""
    os.makedirs(out_dir, exist_ok=True)
    idx = _cell_images(artifacts, image_count, cell_seed(seed, 0))
    images = artifacts.images[idx]
    labels = artifacts.labels[idx]
    schedule = ArrivalSchedule(period=period, image_count=image_count)
    if trace is None:
        duration = schedule.arrival(image_count - 1) + 2 * period + 1.0
        scenario = ScenarioConfig.alternating(pattern, base_rate,
                                              segment_duration)
        trace = build_scenario_trace(scenario, duration)
    records = run_simulation(artifacts.model, artifacts.teacher, artifacts.tables,
                             images, labels, trace, schedule, sim_config)
    write_records_csv(os.path.join(out_dir, "varying_records.csv"), records)
    report = report_from_records(records, top_n)
    write_rows_csv(os.path.join(out_dir, "varying_summary.csv"),
                   [report.as_row()])
    return records, report
