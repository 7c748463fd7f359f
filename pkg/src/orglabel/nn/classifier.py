"""Estimator-style wrapper around the from-scratch sequence models."""

from __future__ import annotations

import numpy as np

from ..base import (
    Estimator,
    as_id_matrix,
    as_label_vector,
    check_fitted,
    check_same_length,
    require_all_classes,
)
from ..embeddings import EmbeddingMatrix
from .model import MODEL_KINDS, forward_batch, init_model, softmax
from .training import TrainConfig, train


def derive_lengths(ids: np.ndarray) -> np.ndarray:
    """Infer true lengths from right-padded id rows (PAD id is 0)."""
    nonpad = ids != 0
    return nonpad.sum(axis=1).astype(np.int64)


class SequenceClassifier(Estimator):
    """Recurrent text classifier over padded token-id sequences.

    ``X`` is an integer matrix (n_examples, width) of right-padded token ids;
    lengths default to the count of non-PAD ids per row. The initial
    embedding comes from ``embedding_init`` (an EmbeddingMatrix or a raw
    (vocab, dim) array); without one, rows are drawn uniformly from
    [-0.25, 0.25] with the PAD row zero, which requires ``vocab_size``.
    """

    def __init__(
        self,
        kind="bilstm",
        hidden_dim=32,
        epochs=10,
        batch_size=32,
        learning_rate=1e-3,
        optimizer="adam",
        clip_norm=5.0,
        seed=0,
        patience=0,
        embedding_init=None,
        embedding_dim=50,
        vocab_size=None,
        trainable_embeddings=True,
        num_classes=None,
    ):
        self.kind = kind
        self.hidden_dim = hidden_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.optimizer = optimizer
        self.clip_norm = clip_norm
        self.seed = seed
        self.patience = patience
        self.embedding_init = embedding_init
        self.embedding_dim = embedding_dim
        self.vocab_size = vocab_size
        self.trainable_embeddings = trainable_embeddings
        self.num_classes = num_classes

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            optimizer=self.optimizer,
            clip_norm=self.clip_norm,
            seed=self.seed,
            patience=self.patience,
        )

    def _initial_embedding(self) -> tuple[np.ndarray, bool]:
        init = self.embedding_init
        if isinstance(init, EmbeddingMatrix):
            return init.matrix, self.trainable_embeddings and init.trainable
        if init is not None:
            return np.asarray(init, dtype=np.float64), self.trainable_embeddings
        if self.vocab_size is None:
            raise ValueError("vocab_size is required without embedding_init")
        rng = np.random.default_rng([self.seed, 2])
        matrix = rng.uniform(
            -0.25, 0.25, (self.vocab_size, self.embedding_dim)
        )
        matrix[0] = 0.0
        return matrix, self.trainable_embeddings

    def fit(self, X, y, lengths=None):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        config = self._train_config()
        ids = as_id_matrix(X)
        y = as_label_vector(y)
        check_same_length(ids, y, "X and y")
        num_classes = self.num_classes or int(y.max()) + 1
        require_all_classes(y, num_classes)
        if lengths is None:
            lengths = derive_lengths(ids)

        embedding, trainable = self._initial_embedding()
        self.params_ = init_model(
            self.kind,
            embedding,
            num_classes=num_classes,
            hidden_dim=self.hidden_dim,
            seed=self.seed,
            embedding_trainable=trainable,
        )
        self.loss_curve_ = train(self.params_, ids, lengths, y, config)
        self.classes_ = np.arange(num_classes)
        return self

    def predict_proba(self, X, lengths=None):
        check_fitted(self, "params_")
        ids = as_id_matrix(X)
        if lengths is None:
            lengths = derive_lengths(ids)
        logits, _ = forward_batch(self.params_, ids, lengths)
        return softmax(logits)

    def predict_scores(self, X, lengths=None):
        return self.predict_proba(X, lengths)

    def predict(self, X, lengths=None):
        return np.argmax(self.predict_proba(X, lengths), axis=1)
