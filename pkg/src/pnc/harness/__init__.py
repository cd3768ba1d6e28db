from pnc.harness.dataset import (Dataset, DatasetConfig,
                                 generate_synthetic_dataset, ingest_raw_dataset,
                                 load_dataset, save_dataset)
from pnc.harness.experiments import (Artifacts, ExperimentGrid, run_grid,
                                     run_varying_scenario,
                                     sweep_accuracy_vs_size, write_rows_csv)
from pnc.harness.manifest import write_manifest
from pnc.harness.metrics import MetricsReport, report_from_records, top_n_accuracy

__all__ = [
    "Artifacts", "Dataset", "DatasetConfig", "ExperimentGrid", "MetricsReport",
    "generate_synthetic_dataset", "ingest_raw_dataset", "load_dataset",
    "report_from_records", "run_grid", "run_varying_scenario", "save_dataset",
    "sweep_accuracy_vs_size", "top_n_accuracy", "write_manifest",
    "write_rows_csv",
]
