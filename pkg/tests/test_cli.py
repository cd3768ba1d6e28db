"""End-to-end command-line workflow on a miniature configuration."""

import csv
import json
import os

import numpy as np
import pytest

from pnc.harness.cli import main

TINY_CONFIG = {
    "dataset": {"train_ae": 100, "val": 24, "test": 40, "noise": 0.08},
    "teacher": {"target_accuracy": 0.9, "max_epochs": 40},
    "training": {
        "pretrain": {"learning_rate": 0.002, "batch_size": 25, "epochs": 2},
        "distill": {"learning_rate": 0.002, "batch_size": 25, "epochs": 2},
    },
    "model": {"latent_channels": 4},
    "grid": {"scenarios": ["no_jamming", "heavy_jamming"],
             "periods": [0.3], "repetitions": 1, "images_per_cell": 8},
    "vary": {"image_count": 8, "segment_duration": 1.0},
    "sweep": {"size_limits": [0, 100, 10000]},
}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps(TINY_CONFIG))
    return root, str(config)


def _run(args):
    assert main(args) == 0


@pytest.fixture(scope="module")
def pipeline(workdir):
    root, config = workdir
    data = str(root / "dataset" / "dataset.npz")
    _run(["--config", config, "--out", str(root / "dataset"),
          "dataset", "gen"])
    _run(["--config", config, "--out", str(root / "teacher"),
          "train", "teacher", "--data", data])
    teacher = str(root / "teacher" / "teacher.json")
    _run(["--config", config, "--out", str(root / "ae"),
          "train", "ae", "--data", data, "--teacher", teacher])
    model = str(root / "ae" / "ae.json")
    _run(["--config", config, "--out", str(root / "tables"),
          "tables", "build", "--data", data, "--model", model])
    tables = str(root / "tables" / "tables.json")
    return {"root": root, "config": config, "data": data,
            "teacher": teacher, "model": model, "tables": tables}


class TestPipeline:
    def test_dataset_generated_with_manifest(self, pipeline):
        root = pipeline["root"]
        assert os.path.exists(pipeline["data"])
        manifest = json.loads((root / "dataset" / "manifest.json").read_text())
        assert manifest["command"] == "dataset gen"
        assert "dataset.npz" in manifest["outputs"]

    def test_training_metrics_csv_emitted(self, pipeline):
        root = pipeline["root"]
        with open(root / "ae" / "ae_metrics.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        assert {"epoch", "stage", "kept_channels", "loss", "accuracy"} <= \
            set(rows[0])
        stages = {row["stage"] for row in rows}
        assert stages == {"pretrain", "distill"}

    def test_sweep_command(self, pipeline):
        root = pipeline["root"]
        _run(["--config", pipeline["config"], "--out", str(root / "sweep"),
              "sweep", "size", "--data", pipeline["data"],
              "--model", pipeline["model"], "--teacher", pipeline["teacher"],
              "--tables", pipeline["tables"]])
        with open(root / "sweep" / "sweep_size.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        assert float(rows[0]["mean_channels_used"]) == 0.0
        assert float(rows[-1]["mean_channels_used"]) == 4.0

    def test_sim_grid_and_report(self, pipeline):
        root = pipeline["root"]
        _run(["--config", pipeline["config"], "--out", str(root / "grid"),
              "sim", "grid", "--data", pipeline["data"],
              "--model", pipeline["model"], "--teacher", pipeline["teacher"],
              "--tables", pipeline["tables"]])
        summary_path = root / "grid" / "grid_summary.csv"
        with open(summary_path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        records_csv = root / "grid" / "grid_no_jamming_300ms_rep0.csv"
        _run(["--out", str(root / "report"), "report",
              "--records", str(records_csv)])
        assert (root / "report" / "report.csv").exists()

    def test_sim_vary(self, pipeline):
        root = pipeline["root"]
        _run(["--config", pipeline["config"], "--out", str(root / "vary"),
              "sim", "vary", "--data", pipeline["data"],
              "--model", pipeline["model"], "--teacher", pipeline["teacher"],
              "--tables", pipeline["tables"]])
        assert (root / "vary" / "varying_records.csv").exists()
        assert (root / "vary" / "varying_summary.csv").exists()

    def test_sim_vary_socket_transport(self, pipeline):
        root = pipeline["root"]
        _run(["--config", pipeline["config"], "--out", str(root / "socket"),
              "sim", "vary", "--transport", "socket",
              "--data", pipeline["data"], "--model", pipeline["model"],
              "--teacher", pipeline["teacher"], "--tables",
              pipeline["tables"]])
        with open(root / "socket" / "vary_socket.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8

    def test_train_fixed_rate_model(self, pipeline):
        root = pipeline["root"]
        _run(["--config", pipeline["config"], "--out", str(root / "fixed"),
              "train", "fixed", "--data", pipeline["data"],
              "--teacher", pipeline["teacher"], "--k-fixed", "2"])
        assert (root / "fixed" / "fixed_2.json").exists()

    def test_sim_vary_with_trace_file(self, pipeline, tmp_path):
        root = pipeline["root"]
        trace_csv = tmp_path / "trace.csv"
        trace_csv.write_text(
            "t_seconds,rate_bytes_per_second\n0.0,800.0\n3.0,200.0\n6.0,800.0\n")
        _run(["--config", pipeline["config"], "--out", str(tmp_path / "out"),
              "sim", "vary", "--trace", str(trace_csv),
              "--data", pipeline["data"], "--model", pipeline["model"],
              "--teacher", pipeline["teacher"], "--tables",
              pipeline["tables"]])
        assert (tmp_path / "out" / "varying_records.csv").exists()

    def test_train_ae_with_custom_tail_distribution(self, pipeline, tmp_path):
        config = dict(TINY_CONFIG)
        config["model"] = {"latent_channels": 4,
                           "tail_probs": [1.0, 0.0, 0.0, 0.0]}
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps(config))
        _run(["--config", str(cfg_path), "--out", str(tmp_path / "ae"),
              "train", "ae", "--data", pipeline["data"],
              "--teacher", pipeline["teacher"]])
        with open(tmp_path / "ae" / "ae_metrics.csv") as fh:
            rows = list(csv.DictReader(fh))
        # point mass at zero drop: every step trains the full prefix only
        assert {row["kept_channels"] for row in rows} == {"4"}

    def test_dataset_ingest_command(self, pipeline, tmp_path):
        pgm = tmp_path / "img.pgm"
        pgm.write_bytes(b"P5\n4 4\n255\n" + bytes(range(16)))
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("img.pgm,1\nmissing.pgm,2\n")
        _run(["--config", pipeline["config"], "--out", str(tmp_path / "out"),
              "dataset", "ingest", "--manifest", str(manifest)])
        assert (tmp_path / "out" / "dataset.npz").exists()
        with open(tmp_path / "out" / "ingest_errors.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1


class TestConfigHandling:
    def test_unknown_command_exits_nonzero(self):
        with pytest.raises(SystemExit):
            main(["bogus"])

    def test_missing_records_file_reports_error(self, tmp_path, capsys):
        code = main(["--out", str(tmp_path), "report",
                     "--records", str(tmp_path / "nope.csv")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_config_overrides_defaults(self, tmp_path):
        config = tmp_path / "c.json"
        config.write_text(json.dumps({"dataset": {"n_classes": 4}}))
        from pnc.harness.cli import load_config
        cfg = load_config(str(config))
        assert cfg["dataset"]["n_classes"] == 4
        assert cfg["dataset"]["image_size"] == 32   # untouched default
