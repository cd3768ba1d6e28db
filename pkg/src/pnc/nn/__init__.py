from pnc.nn.adam import Adam
from pnc.nn.checkpoint import assign_params, load_params, save_params
from pnc.nn.layers import (Conv2d, Dense, Flatten, Layer, Network,
                           UpsampleConv2d, clip_by_value, clip_by_value_grad)
from pnc.nn.models import (Autoencoder, Classifier, build_autoencoder,
                           build_classifier, build_linear_autoencoder,
                           log_softmax, softmax)

__all__ = [
    "Adam", "Autoencoder", "Classifier", "Conv2d", "Dense", "Flatten", "Layer",
    "Network", "UpsampleConv2d", "assign_params", "build_autoencoder",
    "build_classifier", "build_linear_autoencoder", "clip_by_value",
    "clip_by_value_grad", "load_params", "log_softmax", "save_params", "softmax",
]
