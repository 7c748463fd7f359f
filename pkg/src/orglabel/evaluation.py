"""Confusion-matrix metrics and stratified fold planning.

Accuracy is micro (trace over total); precision, recall, and F1 are computed
per class one-vs-rest and macro-averaged over the classes present in the
gold labels, with zero-denominator classes scoring 0. F1 is averaged per
class, not recomputed from the macro precision and recall.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np


def confusion_matrix(golds, preds, num_classes: int) -> np.ndarray:
    """Count matrix with rows as gold class and columns as predicted class."""
    golds = np.asarray(golds, dtype=np.int64)
    preds = np.asarray(preds, dtype=np.int64)
    if golds.shape != preds.shape or golds.ndim != 1:
        raise ValueError("golds and preds must be 1-D and the same length")
    if golds.size == 0:
        raise ValueError("cannot build a confusion matrix from zero examples")
    for name, arr in (("gold", golds), ("pred", preds)):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise ValueError(f"{name} index out of range for {num_classes} classes")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (golds, preds), 1)
    return cm


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    precision_by_class: tuple[float, ...] = field(default=(), repr=False)
    recall_by_class: tuple[float, ...] = field(default=(), repr=False)
    f1_by_class: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }

    def by_name(self, name: str) -> float:
        return getattr(self, name)


METRIC_NAMES = ("accuracy", "f1", "precision", "recall")


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    cm = np.asarray(cm, dtype=np.float64)
    total = cm.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    k = cm.shape[0]
    tp = np.diag(cm)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp

    precision = np.where(tp + fp > 0, tp / np.maximum(tp + fp, 1), 0.0)
    recall = np.where(tp + fn > 0, tp / np.maximum(tp + fn, 1), 0.0)
    pr_sum = precision + recall
    f1 = np.where(pr_sum > 0, 2.0 * precision * recall / np.maximum(pr_sum, 1e-300), 0.0)

    present = cm.sum(axis=1) > 0
    if not present.any():
        raise ValueError("no class present in gold labels")
    return Metrics(
        accuracy=float(np.trace(cm) / total),
        precision=float(precision[present].mean()),
        recall=float(recall[present].mean()),
        f1=float(f1[present].mean()),
        precision_by_class=tuple(float(x) for x in precision),
        recall_by_class=tuple(float(x) for x in recall),
        f1_by_class=tuple(float(x) for x in f1),
    )


def evaluate_predictions(golds, preds, num_classes: int) -> Metrics:
    return metrics_from_confusion(confusion_matrix(golds, preds, num_classes))


@dataclass
class FoldPlan:
    """Disjoint, exhaustive fold index sets balanced within every class."""

    folds: list[np.ndarray]
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_indices(self, fold: int) -> np.ndarray:
        parts = [f for i, f in enumerate(self.folds) if i != fold]
        return np.sort(np.concatenate(parts))

    def test_indices(self, fold: int) -> np.ndarray:
        return np.sort(self.folds[fold])

    def content_hash(self) -> str:
        canonical = json.dumps(
            [sorted(int(i) for i in fold) for fold in self.folds]
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def stratified_kfold(labels, k: int = 10, seed: int = 0) -> FoldPlan:
    """Shuffle within each class and deal round-robin into k folds.

    Successive classes continue the deal where the previous one stopped, so
    overall fold sizes also differ by at most one. Any class with fewer than
    k members is an error naming it.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-D sequence")
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng([seed, 3])
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if len(members) < k:
            raise ValueError(
                f"class {int(cls)} has only {len(members)} examples, fewer than "
                f"k={k}"
            )
        shuffled = members[rng.permutation(len(members))]
        for i, idx in enumerate(shuffled):
            folds[(offset + i) % k].append(int(idx))
        offset = (offset + len(members)) % k
    return FoldPlan(
        folds=[np.array(sorted(f), dtype=np.int64) for f in folds], seed=seed
    )
