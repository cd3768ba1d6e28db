"""End-to-end simulated offloading runs producing per-image records.

Each image is encoded at its arrival (a configurable constant encode
latency), streamed in blocks against the bandwidth trace, and preempted the
moment the next block could not complete before the next image's features
are ready. A block is therefore transmitted only if it finishes by the
deadline, which makes deadline compliance hold by construction at block
granularity. The captured byte stream then runs through the real receiver
parser, and classification happens on the assembled prefix latents.
"""

import csv
from dataclasses import dataclass, fields

import numpy as np

from pnc.codec.image_codec import encode_latent
from pnc.errors import ConfigError
from pnc.netsim.trace import ArrivalSchedule, BandwidthTrace, SimChannel, \
    available_bytes
from pnc.protocol.client import client_send
from pnc.protocol.framing import BLOCK_SIZE, compute_deadline
from pnc.protocol.server import assemble_latent, parse_stream


@dataclass(frozen=True)
class SimConfig:
    encode_latency: float = 0.0005  # seconds per image, from a local micro-benchmark
    block_size: int = BLOCK_SIZE
    preemption: str = "deadline"    # "deadline" or "none"
    top_n: int = 1

    def __post_init__(self):
        if self.encode_latency < 0.0:
            raise ConfigError("encode_latency must be >= 0")
        if self.preemption not in ("deadline", "none"):
            raise ConfigError(f"unknown preemption policy {self.preemption!r}")


@dataclass
class TransmissionRecord:
    image_id: int
    t_capture: float
    encode_ready: float
    deadline: float
    budget_bytes: float
    transmit_start: float
    transmit_end: float
    total_size: int
    bytes_delivered: int
    blocks_sent: int
    stop_sent: bool
    fully_offloaded: bool
    channels_used: int
    channel_count: int
    gt_class: int
    predicted_class: int
    gt_rank: int
    error: str = ""


def rank_of_class(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """1-based rank of each label's probability, ties won by lower class index."""
    n = probs.shape[0]
    target = probs[np.arange(n), labels]
    higher = (probs > target[:, None]).sum(axis=1)
    tied_before = ((probs == target[:, None]) &
                   (np.arange(probs.shape[1])[None, :] < labels[:, None])).sum(axis=1)
    return (higher + tied_before + 1).astype(int)


class _TimedTransport:
    """Transport that charges every write to the simulated channel."""

    def __init__(self, channel: SimChannel, deadline: float):
        self.channel = channel
        self.deadline = deadline
        self.sink = bytearray()
        self.completions = []   # one entry per write, in order

    def would_overrun(self, nbytes: int) -> bool:
        done = self.channel.peek_completion(nbytes)
        return done is None or done > self.deadline

    def write(self, data: bytes) -> None:
        done = self.channel.grant_block(len(data))
        if done is None:
            raise BrokenPipeError("trace exhausted before block completion")
        self.sink.extend(data)
        self.completions.append(done)


def run_simulation(model, teacher, tables, images, labels,
                   trace: BandwidthTrace, schedule: ArrivalSchedule,
                   config: SimConfig = SimConfig(), encoded=None,
                   return_stream=False):
    """Simulate offloading ``schedule.image_count`` images over ``trace``.

    images/labels are indexed cyclically when shorter than the schedule.
    Pass ``encoded`` (aligned EncodedImage list) to reuse precomputed
    encodings across runs. Returns one TransmissionRecord per image, plus
    the captured wire bytes when ``return_stream`` is set.
    """
    count = schedule.image_count
    if len(images) == 0:
        raise ConfigError("no evaluation images")
    last_deadline = compute_deadline(schedule.arrival(count - 1), schedule.period,
                                     config.encode_latency)
    if trace.duration < last_deadline:
        raise ConfigError(
            f"trace duration {trace.duration} ends before the last deadline "
            f"{last_deadline}")

    if encoded is None:
        encoded = encode_image_set(model, tables,
                                   [images[i % len(images)] for i in range(count)])

    channel = SimChannel(trace)
    stream = bytearray()
    records = []
    for i in range(count):
        idx = i % len(images)
        t_cap = schedule.arrival(i)
        ready = t_cap + config.encode_latency
        deadline = compute_deadline(t_cap, schedule.period, config.encode_latency)
        wire = encoded[i]
        total = wire.total_size
        budget = available_bytes(trace, ready, deadline)
        channel.cursor = max(channel.cursor, ready)
        start = channel.cursor
        transport = _TimedTransport(channel, deadline)
        if config.preemption == "deadline":
            probe = transport.would_overrun
        else:
            probe = None
        error = ""
        try:
            state = client_send(wire, transport, probe=probe,
                                block_size=config.block_size)
            if state.transport_error:
                error = state.transport_error
        except Exception as exc:  # per-image failures never abort the run
            records.append(_error_record(i, t_cap, ready, deadline, budget,
                                         start, total, labels[idx], str(exc)))
            continue
        stream.extend(transport.sink)
        # payload blocks precede the stop frame, so the payload finishes at
        # the blocks_sent-th write; the stop frame may drain past the deadline
        if state.blocks_sent:
            end = transport.completions[state.blocks_sent - 1]
        else:
            end = start
        records.append(TransmissionRecord(
            image_id=i, t_capture=t_cap, encode_ready=ready, deadline=deadline,
            budget_bytes=budget, transmit_start=start, transmit_end=end,
            total_size=total, bytes_delivered=state.payload_bytes_sent,
            blocks_sent=state.blocks_sent, stop_sent=state.stop_sent,
            fully_offloaded=state.payload_bytes_sent == total,
            channels_used=0, channel_count=len(wire.channels),
            gt_class=int(labels[idx]), predicted_class=-1, gt_rank=0,
            error=error))

    # run the captured stream through the real receiver and classify
    m = model.latent_channels
    probe_latent = model.encode(images[:1])
    h, w = probe_latent.shape[2], probe_latent.shape[3]
    received_by_id = {}
    for rec in parse_stream(bytes(stream), tables, h * w, config.block_size):
        received_by_id[rec.image_id] = rec
    latents = np.zeros((count, m, h, w), dtype=np.float64)
    for rec in records:
        got = received_by_id.get(rec.image_id)
        if got is not None:
            rec.channels_used = got.channels_used
            latents[rec.image_id] = assemble_latent(got, m, h, w)
    probs = _classify_latents(model, teacher, latents)
    gts = np.array([r.gt_class for r in records])
    ranks = rank_of_class(probs, gts)
    preds = probs.argmax(axis=1)
    for rec, pred, rank in zip(records, preds, ranks):
        rec.predicted_class = int(pred)
        rec.gt_rank = int(rank)
    if return_stream:
        return records, bytes(stream)
    return records


def encode_image_set(model, tables, images) -> list:
    """Encode a batch of images into wire images with sequential ids."""
    out = []
    for i in range(0, len(images), 256):
        chunk = np.stack(images[i:i + 256])
        z = model.encode(chunk)
        for j in range(len(chunk)):
            out.append(encode_latent(z[j], tables, i + j))
    return out


def _classify_latents(model, teacher, latents, chunk=256):
    parts = []
    for i in range(0, len(latents), chunk):
        recon = model.decode(latents[i:i + chunk])
        parts.append(teacher.predict_proba(recon))
    return np.concatenate(parts, axis=0)


def _error_record(i, t_cap, ready, deadline, budget, start, total, label, error):
    return TransmissionRecord(
        image_id=i, t_capture=t_cap, encode_ready=ready, deadline=deadline,
        budget_bytes=budget, transmit_start=start, transmit_end=start,
        total_size=total, bytes_delivered=0, blocks_sent=0, stop_sent=False,
        fully_offloaded=False, channels_used=0, channel_count=0,
        gt_class=int(label), predicted_class=-1, gt_rank=0, error=error)


_BOOL_FIELDS = {"stop_sent", "fully_offloaded"}
_FLOAT_FIELDS = {"t_capture", "encode_ready", "deadline", "budget_bytes",
                 "transmit_start", "transmit_end"}


def write_records_csv(path, records) -> None:
    names = [f.name for f in fields(TransmissionRecord)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for rec in records:
            row = []
            for name in names:
                value = getattr(rec, name)
                if name in _BOOL_FIELDS:
                    row.append(int(value))
                elif name in _FLOAT_FIELDS:
                    row.append(repr(value))
                else:
                    row.append(value)
            writer.writerow(row)


def read_records_csv(path) -> list:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            kwargs = {}
            for f in fields(TransmissionRecord):
                raw = row[f.name]
                if f.name in _BOOL_FIELDS:
                    kwargs[f.name] = bool(int(raw))
                elif f.name in _FLOAT_FIELDS:
                    kwargs[f.name] = float(raw)
                elif f.name == "error":
                    kwargs[f.name] = raw
                else:
                    kwargs[f.name] = int(raw)
            records.append(TransmissionRecord(**kwargs))
    return records
