"""From-scratch recurrent sequence classifiers with exact BPTT gradients."""

from .cells import CellParams, cell_step, init_cell
from .classifier import SequenceClassifier, derive_lengths
from .gradients import compute_gradients
from .model import (
    MODEL_KINDS,
    SequenceModelParams,
    cross_entropy,
    forward_logits,
    init_model,
    predict,
    softmax,
)
from .training import TrainConfig, train

__all__ = [
    "CellParams",
    "MODEL_KINDS",
    "SequenceClassifier",
    "SequenceModelParams",
    "TrainConfig",
    "cell_step",
    "compute_gradients",
    "cross_entropy",
    "derive_lengths",
    "forward_logits",
    "init_cell",
    "init_model",
    "predict",
    "softmax",
    "train",
]
