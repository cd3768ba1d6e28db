"""Command-line interface.

Subcommands:
    dataset gen | dataset ingest
    train teacher | train ae | train fixed
    tables build
    sweep size
    sim grid | sim vary
    report

Global flags: --seed, --config <json file>, --out <dir>. Config file values
override built-in defaults; flags override both. All outputs are CSV plus a
JSON run manifest.
"""

import argparse
import copy
import json
import os
import socket
import sys
import threading

import numpy as np

from pnc.codec.huffman import build_huffman_tables, load_tables, save_tables
from pnc.codec.quantizer import quantize_channel
from pnc.errors import ConfigError, ConvergenceError, ParseError
from pnc.harness.dataset import (DatasetConfig, generate_synthetic_dataset,
                                 ingest_raw_dataset, load_dataset, save_dataset)
from pnc.harness.experiments import (Artifacts, ExperimentGrid, run_grid,
                                     run_varying_scenario,
                                     sweep_accuracy_vs_size, write_rows_csv)
from pnc.harness.manifest import write_manifest
from pnc.harness.metrics import report_from_records
from pnc.netsim.simulate import SimConfig, read_records_csv
from pnc.nn.checkpoint import assign_params, load_params, save_params
from pnc.nn.models import build_autoencoder, build_classifier
from pnc.training.taildrop import TaildropConfig
from pnc.training.trainer import (StageConfig, train_autoencoder, train_teacher,
                                  write_metrics_csv)

DEFAULTS = {
    "dataset": {"n_classes": 10, "image_size": 32, "in_channels": 1,
                "train_ae": 2000, "val": 500, "test": 500, "noise": 0.1},
    "model": {"latent_channels": 8, "tail_probs": None},
    "teacher": {"learning_rate": 0.002, "batch_size": 32, "max_epochs": 60,
                "target_accuracy": 0.95},
    "training": {
        "pretrain": {"learning_rate": 0.001, "batch_size": 32, "epochs": 200},
        "distill": {"learning_rate": 0.005, "batch_size": 32, "epochs": 200},
    },
    "simulation": {"encode_latency": 0.0005, "block_size": 64,
                   "preemption": "deadline", "top_n": 1, "base_rate": 1000.0},
    "grid": {"scenarios": ["no_jamming", "light_jamming", "heavy_jamming"],
             "periods": [0.3, 0.5, 0.7], "repetitions": 1,
             "images_per_cell": 100},
    "vary": {"period": 0.5, "image_count": 60, "segment_duration": 10.0,
             "pattern": ["no_jamming", "heavy_jamming"]},
    "sweep": {"size_limits": [0, 50, 100, 150, 200, 250, 300, 350, 400, 450,
                              500, 600]},
}


def _deep_update(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def load_config(path=None) -> dict:
    config = copy.deepcopy(DEFAULTS)
    if path:
        with open(path, encoding="utf-8") as fh:
            _deep_update(config, json.load(fh))
    return config


def _dataset_config(cfg) -> DatasetConfig:
    d = cfg["dataset"]
    return DatasetConfig(
        n_classes=d["n_classes"], image_size=d["image_size"],
        in_channels=d["in_channels"],
        counts=(("train_ae", d["train_ae"]), ("val", d["val"]),
                ("test", d["test"])),
        noise=d["noise"])


def _load_autoencoder(path, cfg, latent_channels=None):
    d = cfg["dataset"]
    latent = latent_channels or cfg["model"]["latent_channels"]
    model = build_autoencoder(d["image_size"], d["in_channels"], latent)
    assign_params(model.named_params(), load_params(path))
    return model


def _load_teacher(path, cfg):
    d = cfg["dataset"]
    model = build_classifier(d["image_size"], d["in_channels"], d["n_classes"])
    assign_params(model.named_params(), load_params(path))
    return model


def _stages(cfg) -> list:
    t = cfg["training"]
    return [
        StageConfig("pretrain", t["pretrain"]["learning_rate"],
                    t["pretrain"]["batch_size"], t["pretrain"]["epochs"]),
        StageConfig("distill", t["distill"]["learning_rate"],
                    t["distill"]["batch_size"], t["distill"]["epochs"]),
    ]


def _artifacts(args, cfg, split="test") -> Artifacts:
    dataset = load_dataset(args.data)
    images, labels = dataset.split(split)
    model = _load_autoencoder(args.model, cfg)
    teacher = _load_teacher(args.teacher, cfg)
    tables = load_tables(args.tables)
    return Artifacts(model=model, teacher=teacher, tables=tables,
                     images=images, labels=labels)


def _sim_config(cfg, args) -> SimConfig:
    s = cfg["simulation"]
    return SimConfig(encode_latency=s["encode_latency"],
                     block_size=getattr(args, "block_size", None) or s["block_size"],
                     preemption=getattr(args, "preemption", None) or s["preemption"],
                     top_n=s["top_n"])


def cmd_dataset_gen(args, cfg):
    dataset = generate_synthetic_dataset(_dataset_config(cfg), seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "dataset.npz")
    save_dataset(path, dataset)
    write_manifest(args.out, "dataset gen", args.seed, cfg["dataset"], [path])
    print(f"wrote {path}: {len(dataset.images)} images, "
          f"{dataset.n_classes} classes")
    return 0


def cmd_dataset_ingest(args, cfg):
    d = cfg["dataset"]
    dataset, errors = ingest_raw_dataset(
        args.manifest, image_size=d["image_size"], in_channels=d["in_channels"],
        n_classes=d["n_classes"], split=args.split)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "dataset.npz")
    save_dataset(path, dataset)
    outputs = [path]
    if errors:
        err_path = os.path.join(args.out, "ingest_errors.csv")
        write_rows_csv(err_path, [{"file": f, "error": e} for f, e in errors])
        outputs.append(err_path)
    write_manifest(args.out, "dataset ingest", args.seed, cfg["dataset"], outputs)
    print(f"ingested {len(dataset.images)} images, {len(errors)} errors")
    return 0


def cmd_train_teacher(args, cfg):
    dataset = load_dataset(args.data)
    images, labels = dataset.split("train_ae")
    t = cfg["teacher"]
    d = cfg["dataset"]
    try:
        teacher, accuracy = train_teacher(
            images, labels, d["n_classes"], learning_rate=t["learning_rate"],
            batch_size=t["batch_size"], max_epochs=t["max_epochs"],
            target_accuracy=t["target_accuracy"], seed=args.seed,
            image_size=d["image_size"], in_channels=d["in_channels"])
    except ConvergenceError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "teacher.json")
    save_params(path, teacher.named_params())
    write_manifest(args.out, "train teacher", args.seed, t, [path])
    print(f"teacher train accuracy {accuracy:.4f}, wrote {path}")
    return 0


def cmd_train_ae(args, cfg):
    dataset = load_dataset(args.data)
    images, _ = dataset.split("train_ae")
    teacher = _load_teacher(args.teacher, cfg)
    latent = cfg["model"]["latent_channels"]
    if cfg["model"]["tail_probs"] is not None:
        taildrop = TaildropConfig(latent, tuple(cfg["model"]["tail_probs"]))
    else:
        taildrop = TaildropConfig.uniform(latent)
    d = cfg["dataset"]
    model, rows = train_autoencoder(
        images, taildrop, _stages(cfg), seed=args.seed, teacher=teacher,
        image_size=d["image_size"], in_channels=d["in_channels"])
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "ae.json")
    metrics_path = os.path.join(args.out, "ae_metrics.csv")
    save_params(path, model.named_params())
    write_metrics_csv(metrics_path, rows)
    write_manifest(args.out, "train ae", args.seed, cfg["training"],
                   [path, metrics_path])
    print(f"wrote {path}")
    return 0


def cmd_train_fixed(args, cfg):
    dataset = load_dataset(args.data)
    images, _ = dataset.split("train_ae")
    teacher = _load_teacher(args.teacher, cfg)
    d = cfg["dataset"]
    taildrop = TaildropConfig.point_mass(args.k_fixed, drop_length=0)
    model, rows = train_autoencoder(
        images, taildrop, _stages(cfg), seed=args.seed, teacher=teacher,
        image_size=d["image_size"], in_channels=d["in_channels"])
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"fixed_{args.k_fixed}.json")
    metrics_path = os.path.join(args.out, f"fixed_{args.k_fixed}_metrics.csv")
    save_params(path, model.named_params())
    write_metrics_csv(metrics_path, rows)
    write_manifest(args.out, "train fixed", args.seed, cfg["training"],
                   [path, metrics_path])
    print(f"wrote {path}")
    return 0


def cmd_tables_build(args, cfg):
    dataset = load_dataset(args.data)
    images, _ = dataset.split("train_ae")
    model = _load_autoencoder(args.model, cfg)
    corpus = {}
    for i in range(0, len(images), 256):
        z = model.encode(images[i:i + 256])
        for ch in range(z.shape[1]):
            corpus.setdefault(ch + 1, []).append(
                quantize_channel(z[:, ch].reshape(-1)))
    tables = build_huffman_tables(corpus)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "tables.json")
    save_tables(path, tables)
    write_manifest(args.out, "tables build", args.seed, {}, [path])
    print(f"wrote {path}")
    return 0


def cmd_sweep_size(args, cfg):
    artifacts = _artifacts(args, cfg)
    limits = args.limits or cfg["sweep"]["size_limits"]
    rows = sweep_accuracy_vs_size(artifacts, limits,
                                  top_n=cfg["simulation"]["top_n"])
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep_size.csv")
    write_rows_csv(path, [{k: repr(v) if isinstance(v, float) else v
                           for k, v in row.items()} for row in rows])
    write_manifest(args.out, "sweep size", args.seed, cfg["sweep"], [path])
    print(f"wrote {path}")
    return 0


def cmd_sim_grid(args, cfg):
    artifacts = _artifacts(args, cfg)
    g = cfg["grid"]
    grid = ExperimentGrid(
        scenarios=tuple(g["scenarios"]), periods=tuple(g["periods"]),
        repetitions=g["repetitions"], base_seed=args.seed,
        images_per_cell=g["images_per_cell"],
        base_rate=cfg["simulation"]["base_rate"])
    run_grid(grid, artifacts, args.out, _sim_config(cfg, args),
             top_n=cfg["simulation"]["top_n"])
    outputs = [os.path.join(args.out, f) for f in os.listdir(args.out)
               if f.endswith(".csv")]
    write_manifest(args.out, "sim grid", args.seed, g, outputs)
    print(f"wrote grid results to {args.out}")
    return 0


def cmd_sim_vary(args, cfg):
    artifacts = _artifacts(args, cfg)
    if args.transport == "socket":
        return _sim_vary_socket(args, cfg, artifacts)
    v = cfg["vary"]
    trace = None
    if args.trace:
        from pnc.netsim.trace import load_trace_csv
        trace = load_trace_csv(args.trace)
    run_varying_scenario(
        artifacts, args.out, period=v["period"], image_count=v["image_count"],
        base_rate=cfg["simulation"]["base_rate"],
        segment_duration=v["segment_duration"], pattern=tuple(v["pattern"]),
        sim_config=_sim_config(cfg, args), top_n=cfg["simulation"]["top_n"],
        seed=args.seed, trace=trace)
    outputs = [os.path.join(args.out, f) for f in os.listdir(args.out)
               if f.endswith(".csv")]
    write_manifest(args.out, "sim vary", args.seed, v, outputs)
    print(f"wrote varying-scenario results to {args.out}")
    return 0


def _sim_vary_socket(args, cfg, artifacts):
    """Live-transport demo: pipelined client and server over a socket pair."""
    from pnc.protocol.pipeline import PipelinedClient
    from pnc.protocol.server import read_stream
    from pnc.protocol.transport import SocketTransport

    v = cfg["vary"]
    count = min(v["image_count"], len(artifacts.images))
    images = artifacts.images[:count]
    sock_a, sock_b = socket.socketpair()
    client_tr = SocketTransport(sock_a)
    server_tr = SocketTransport(sock_b)
    m, h, w = (artifacts.model.latent_channels,) + \
        artifacts.model.encode(images[:1]).shape[2:]
    client = PipelinedClient(lambda img: artifacts.model.encode(img[None])[0],
                             artifacts.tables, client_tr,
                             block_size=_sim_config(cfg, args).block_size)
    received = []
    server = threading.Thread(
        target=lambda: received.extend(
            read_stream(server_tr, artifacts.tables, h * w)))
    server.start()
    client.run(list(images))
    server.join()
    os.makedirs(args.out, exist_ok=True)
    rows = [{"image_id": r.image_id, "bytes_received": r.bytes_received,
             "channels_used": r.channels_used, "complete": int(r.complete)}
            for r in received]
    path = os.path.join(args.out, "vary_socket.csv")
    write_rows_csv(path, rows)
    print(f"wrote {path} ({len(rows)} images over socket transport)")
    return 0


def cmd_report(args, cfg):
    records = read_records_csv(args.records)
    report = report_from_records(records, top_n=args.top_n or
                                 cfg["simulation"]["top_n"])
    for key, value in report.as_row().items():
        print(f"{key}: {value}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "report.csv")
        write_rows_csv(path, [report.as_row()])
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnc",
        description="progressive neural compression: training, codec, "
                    "offloading simulation")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", help="JSON config overriding defaults")
    parser.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dataset = sub.add_parser("dataset").add_subparsers(dest="sub",
                                                         required=True)
    p = p_dataset.add_parser("gen")
    p.set_defaults(fn=cmd_dataset_gen)
    p = p_dataset.add_parser("ingest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test", choices=["train_ae", "val", "test"])
    p.set_defaults(fn=cmd_dataset_ingest)

    p_train = sub.add_parser("train").add_subparsers(dest="sub", required=True)
    p = p_train.add_parser("teacher")
    p.add_argument("--data", required=True)
    p.set_defaults(fn=cmd_train_teacher)
    p = p_train.add_parser("ae")
    p.add_argument("--data", required=True)
    p.add_argument("--teacher", required=True)
    p.set_defaults(fn=cmd_train_ae)
    p = p_train.add_parser("fixed")
    p.add_argument("--data", required=True)
    p.add_argument("--teacher", required=True)
    p.add_argument("--k-fixed", type=int, required=True)
    p.set_defaults(fn=cmd_train_fixed)

    p_tables = sub.add_parser("tables").add_subparsers(dest="sub", required=True)
    p = p_tables.add_parser("build")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(fn=cmd_tables_build)

    p_sweep = sub.add_parser("sweep").add_subparsers(dest="sub", required=True)
    p = p_sweep.add_parser("size")
    _add_artifact_args(p)
    p.add_argument("--limits", type=int, nargs="*")
    p.set_defaults(fn=cmd_sweep_size)

    p_sim = sub.add_parser("sim").add_subparsers(dest="sub", required=True)
    p = p_sim.add_parser("grid")
    _add_artifact_args(p)
    _add_sim_args(p)
    p.set_defaults(fn=cmd_sim_grid)
    p = p_sim.add_parser("vary")
    _add_artifact_args(p)
    _add_sim_args(p)
    p.add_argument("--transport", default="sim", choices=["sim", "socket"])
    p.add_argument("--trace", help="bandwidth trace CSV overriding the pattern")
    p.set_defaults(fn=cmd_sim_vary)

    p = sub.add_parser("report")
    p.add_argument("--records", required=True)
    p.add_argument("--top-n", type=int)
    p.set_defaults(fn=cmd_report)
    return parser


def _add_artifact_args(p):
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--teacher", required=True)
    p.add_argument("--tables", required=True)


def _add_sim_args(p):
    p.add_argument("--block-size", type=int)
    p.add_argument("--preemption", choices=["deadline", "none"])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    try:
        return args.fn(args, cfg)
    except (ConfigError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
