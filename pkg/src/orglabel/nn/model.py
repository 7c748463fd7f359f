"""Sequence classifier model: embedding -> recurrent cell(s) -> softmax head.

The forward direction consumes positions 0..true_length-1 in order; the
backward direction (bidirectional models only) consumes them in reverse. The
two final hidden states are concatenated and fed through an affine map to
produce class logits. Padded positions are masked with a carry, so they
never influence states, logits, or gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..textprep import EncodedExample
from .cells import CellParams, glorot_uniform, init_cell, step_forward

MODEL_KINDS = ("rnn", "gru", "lstm", "bilstm")

PROB_FLOOR = 1e-12


def softmax(z):
    """Stable softmax: max-subtracted exponentials, normalized to sum 1."""
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax input must be finite")
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs, label: int) -> float:
    """Negative log probability of the true label, floored at 1e-12."""
    probs = np.asarray(probs, dtype=np.float64)
    if not 0 <= label < probs.shape[-1]:
        raise ValueError(f"label {label} out of range for {probs.shape[-1]} classes")
    return float(-np.log(max(probs[label], PROB_FLOOR)))


def _cell_kind(kind: str) -> str:
    return "lstm" if kind == "bilstm" else kind


def is_bidirectional(kind: str) -> bool:
    return kind == "bilstm"


@dataclass
class SequenceModelParams:
    """All trainable weights of one sequence classifier."""

    kind: str
    embedding: np.ndarray
    embedding_trainable: bool
    forward_cell: CellParams
    backward_cell: CellParams | None
    w_out: np.ndarray
    b_out: np.ndarray

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if is_bidirectional(self.kind) != (self.backward_cell is not None):
            raise ValueError("backward cell present iff the model is bidirectional")
        h = self.forward_cell.hidden_dim
        feat = 2 * h if self.backward_cell is not None else h
        if self.w_out.shape[0] != feat:
            raise ValueError(
                f"head expects input dim {feat}, w_out has {self.w_out.shape[0]}"
            )
        if self.b_out.shape != (self.w_out.shape[1],):
            raise ValueError("head bias shape mismatch")

    @property
    def num_classes(self) -> int:
        return self.w_out.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.forward_cell.hidden_dim

    @property
    def embedding_dim(self) -> int:
        return self.embedding.shape[1]

    def catalog(self) -> list[tuple[str, np.ndarray]]:
        """Named parameter arrays in a fixed order (checkpoint and BPTT)."""
        entries = [
            ("embedding", self.embedding),
            ("fwd.w_x", self.forward_cell.w_x),
            ("fwd.w_h", self.forward_cell.w_h),
            ("fwd.b", self.forward_cell.b),
        ]
        if self.backward_cell is not None:
            entries += [
                ("bwd.w_x", self.backward_cell.w_x),
                ("bwd.w_h", self.backward_cell.w_h),
                ("bwd.b", self.backward_cell.b),
            ]
        entries += [("out.w", self.w_out), ("out.b", self.b_out)]
        return entries

    def trainable_catalog(self) -> list[tuple[str, np.ndarray]]:
        entries = self.catalog()
        if not self.embedding_trainable:
            entries = [(n, a) for n, a in entries if n != "embedding"]
        return entries


def init_model(
    kind: str,
    embedding: np.ndarray,
    num_classes: int,
    hidden_dim: int,
    seed: int = 0,
    embedding_trainable: bool = True,
) -> SequenceModelParams:
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if num_classes < 2:
        raise ValueError("need at least two classes")
    rng = np.random.default_rng([seed, 0])
    d = embedding.shape[1]
    cell_kind = _cell_kind(kind)
    forward_cell = init_cell(cell_kind, d, hidden_dim, rng)
    backward_cell = (
        init_cell(cell_kind, d, hidden_dim, rng) if is_bidirectional(kind) else None
    )
    feat = 2 * hidden_dim if backward_cell is not None else hidden_dim
    w_out = glorot_uniform(rng, feat, num_classes, (feat, num_classes))
    b_out = np.zeros(num_classes, dtype=np.float64)
    return SequenceModelParams(
        kind=kind,
        embedding=np.array(embedding, dtype=np.float64, copy=True),
        embedding_trainable=embedding_trainable,
        forward_cell=forward_cell,
        backward_cell=backward_cell,
        w_out=w_out,
        b_out=b_out,
    )


def _check_batch(ids, lengths):
    ids = np.asarray(ids, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    if ids.ndim != 2:
        raise ValueError("ids must be (batch, time)")
    if lengths.shape != (ids.shape[0],):
        raise ValueError("lengths must be (batch,)")
    if lengths.min() < 1:
        raise ValueError("every example needs true_length >= 1")
    if lengths.max() > ids.shape[1]:
        raise ValueError("true_length exceeds the padded width")
    return ids, lengths


def _run_direction(cell, x_emb, mask, reverse: bool):
    """Run one direction over (B, T, d) inputs with carry masking.

    Returns the final hidden state (B, h) and per-step caches (for BPTT).
    """
    batch, steps, _ = x_emb.shape
    state = cell.zero_state(batch)
    caches = [None] * steps
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    for t in order:
        new_state, cache = step_forward(cell, x_emb[:, t, :], state)
        m = mask[:, t : t + 1]
        state = tuple(m * new + (1.0 - m) * old for new, old in zip(new_state, state))
        caches[t] = cache
    return state[0], caches


def forward_batch(params: SequenceModelParams, ids, lengths, with_caches=False):
    """Logits for a batch of padded id sequences.

    Returns (logits, aux) where aux carries intermediate values needed by the
    gradient pass when ``with_caches`` is set.
    """
    ids, lengths = _check_batch(ids, lengths)
    batch, steps = ids.shape
    x_emb = params.embedding[ids]
    mask = (np.arange(steps)[None, :] < lengths[:, None]).astype(np.float64)

    h_fwd, caches_fwd = _run_direction(params.forward_cell, x_emb, mask, False)
    if params.backward_cell is not None:
        h_bwd, caches_bwd = _run_direction(params.backward_cell, x_emb, mask, True)
        feat = np.concatenate([h_fwd, h_bwd], axis=1)
    else:
        h_bwd, caches_bwd = None, None
        feat = h_fwd
    logits = feat @ params.w_out + params.b_out
    if not with_caches:
        return logits, None
    aux = {
        "ids": ids,
        "mask": mask,
        "feat": feat,
        "caches_fwd": caches_fwd,
        "caches_bwd": caches_bwd,
    }
    return logits, aux


def forward_logits(params: SequenceModelParams, example: EncodedExample):
    """Logits for one encoded example; true_length must be at least 1."""
    if example.true_length < 1:
        raise ValueError("example has true_length 0")
    logits, _ = forward_batch(
        params,
        example.ids.reshape(1, -1),
        np.array([example.true_length]),
    )
    return logits[0]


def predict(params: SequenceModelParams, example: EncodedExample):
    """(label index, probability vector); ties take the lowest index."""
    probs = softmax(forward_logits(params, example))
    return int(np.argmax(probs)), probs
