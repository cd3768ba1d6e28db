from pnc.training.evaluate import (all_subset_accuracies, prefix_accuracy_curve,
                                   prefix_mse_curve, subset_accuracy)
from pnc.training.losses import (cross_entropy_hard, loss_distill,
                                 loss_reconstruction)
from pnc.training.taildrop import (TaildropConfig, averaged_taildrop_gradient,
                                   sample_tail_length)
from pnc.training.trainer import (StageConfig, train_autoencoder, train_epoch,
                                  train_fixed_rate, train_stage, train_teacher,
                                  write_metrics_csv)

__all__ = [
    "StageConfig", "TaildropConfig", "all_subset_accuracies",
    "averaged_taildrop_gradient", "cross_entropy_hard", "loss_distill",
    "loss_reconstruction", "prefix_accuracy_curve", "prefix_mse_curve",
    "sample_tail_length", "subset_accuracy", "train_autoencoder", "train_epoch",
    "train_fixed_rate", "train_stage", "train_teacher", "write_metrics_csv",
]
