"""Classification metrics and aggregate reports over transmission records."""

from dataclasses import dataclass

import numpy as np

from pnc.errors import ConfigError
from pnc.netsim.simulate import rank_of_class


def top_n_accuracy(predictions, ground_truths, n: int) -> float:
    """Fraction of samples whose true class ranks within the top n.

    Rank ties are broken deterministically: a class tied with the true class
    but with a lower index is admitted first.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    ground_truths = np.asarray(ground_truths, dtype=int)
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if predictions.ndim != 2 or predictions.shape[0] != ground_truths.shape[0]:
        raise ConfigError(
            f"predictions {predictions.shape} do not match "
            f"{ground_truths.shape[0]} ground truths")
    sums = predictions.sum(axis=1)
    if predictions.size and np.max(np.abs(sums - 1.0)) > 1e-6:
        raise ConfigError("each prediction must sum to 1 within 1e-6")
    ranks = rank_of_class(predictions, ground_truths)
    return float((ranks <= n).mean())


@dataclass(frozen=True)
class MetricsReport:
    n_images: int
    top_n: int
    accuracy: float
    fraction_fully_offloaded: float
    mean_throughput: float        # payload bytes per second over the run span
    mean_channels_used: float
    mean_bytes_delivered: float

    def as_row(self) -> dict:
        return {
            "n_images": self.n_images,
            "top_n": self.top_n,
            "accuracy": repr(self.accuracy),
            "fraction_fully_offloaded": repr(self.fraction_fully_offloaded),
            "mean_throughput": repr(self.mean_throughput),
            "mean_channels_used": repr(self.mean_channels_used),
            "mean_bytes_delivered": repr(self.mean_bytes_delivered),
        }


def report_from_records(records, top_n: int = 1) -> MetricsReport:
    """Aggregate a metrics report; every value is recomputable from records."""
    if not records:
        raise ConfigError("no records to aggregate")
    hits = [1.0 if 0 < r.gt_rank <= top_n else 0.0 for r in records]
    fully = [1.0 if r.fully_offloaded else 0.0 for r in records]
    delivered = [r.bytes_delivered for r in records]
    span = max(r.deadline for r in records) - min(r.encode_ready for r in records)
    throughput = sum(delivered) / span if span > 0 else 0.0
    return MetricsReport(
        n_images=len(records),
        top_n=top_n,
        accuracy=float(np.mean(hits)),
        fraction_fully_offloaded=float(np.mean(fully)),
        mean_throughput=float(throughput),
        mean_channels_used=float(np.mean([r.channels_used for r in records])),
        mean_bytes_delivered=float(np.mean(delivered)),
    )
