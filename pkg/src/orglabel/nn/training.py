"""Mini-batch training with Adam or plain SGD, deterministic given a seed."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import TrainingDivergedError
from .gradients import batch_loss_and_gradients
from .model import SequenceModelParams


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    clip_norm: float = 5.0
    seed: int = 0
    patience: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be > 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.clip_norm <= 0:
            raise ValueError("clip norm must be > 0")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


class AdamState:
    def __init__(self, catalog):
        self.m = {name: np.zeros_like(arr) for name, arr in catalog}
        self.v = {name: np.zeros_like(arr) for name, arr in catalog}
        self.t = 0


def clip_gradients(grads: dict[str, np.ndarray], names, clip_norm: float) -> float:
    """Scale the listed gradients so their global L2 norm is <= clip_norm."""
    total = 0.0
    for name in names:
        g = grads[name]
        total += float((g * g).sum())
    norm = np.sqrt(total)
    if norm > clip_norm:
        scale = clip_norm / norm
        for name in names:
            grads[name] *= scale
    return norm


def apply_update(params_catalog, grads, config: TrainConfig, adam: AdamState | None):
    if config.optimizer == "sgd":
        for name, arr in params_catalog:
            arr -= config.learning_rate * grads[name]
        return
    adam.t += 1
    b1, b2 = config.beta1, config.beta2
    correction = np.sqrt(1.0 - b2**adam.t) / (1.0 - b1**adam.t)
    for name, arr in params_catalog:
        g = grads[name]
        adam.m[name] = b1 * adam.m[name] + (1.0 - b1) * g
        adam.v[name] = b2 * adam.v[name] + (1.0 - b2) * (g * g)
        arr -= (
            config.learning_rate
            * correction
            * adam.m[name]
            / (np.sqrt(adam.v[name]) + config.eps)
        )


def train(
    params: SequenceModelParams,
    ids: np.ndarray,
    lengths: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
) -> list[float]:
    """Train in place; returns the per-epoch mean training loss curve.

    The shuffle order, and therefore every weight, is fixed by the config
    seed. A non-finite loss aborts with a diagnostic.
    """
    ids = np.asarray(ids, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    n = ids.shape[0]
    if n == 0:
        raise ValueError("training set is empty")

    rng = np.random.default_rng([config.seed, 1])
    catalog = params.trainable_catalog()
    names = [name for name, _ in catalog]
    adam = AdamState(catalog) if config.optimizer == "adam" else None

    curve: list[float] = []
    best = np.inf
    stale = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, config.batch_size):
            sel = order[start : start + config.batch_size]
            loss, grads = batch_loss_and_gradients(
                params, ids[sel], lengths[sel], labels[sel]
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch offset {start}"
                )
            clip_gradients(grads, names, config.clip_norm)
            apply_update(catalog, grads, config, adam)
            total_loss += loss * len(sel)
        epoch_loss = total_loss / n
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(f"non-finite epoch loss at epoch {epoch}")
        curve.append(epoch_loss)
        if config.patience > 0:
            if epoch_loss < best - 1e-12:
                best = epoch_loss
                stale = 0
            else:
                stale += 1
                if stale >= config.patience:
                    break
    return curve
