"""Exact gradients of the mean batch loss via backpropagation through time.

The backward pass mirrors the forward carry masking, so padded positions
contribute exactly zero to every gradient, including the PAD embedding row.
Gradients come back as a name -> array dict aligned with the parameter
catalog of the model.
"""

from __future__ import annotations

import numpy as np

from ..textprep import EncodedExample
from .cells import step_backward
from .model import PROB_FLOOR, SequenceModelParams, forward_batch, softmax


def _backprop_direction(cell, caches, mask, d_final, reverse: bool):
    """Unwind one direction; returns (d_inputs, grads dict)."""
    batch, steps = mask.shape
    grads = cell.zero_grads()
    d_inputs = np.zeros((batch, steps, cell.input_dim), dtype=np.float64)
    d_h = d_final
    d_c = np.zeros_like(d_final) if cell.kind == "lstm" else None
    # Unwind in the opposite order of consumption.
    order = range(steps) if reverse else range(steps - 1, -1, -1)
    for t in order:
        m = mask[:, t : t + 1]
        if cell.kind == "lstm":
            d_state_new = (d_h * m, d_c * m)
        else:
            d_state_new = (d_h * m,)
        dx, d_prev = step_backward(cell, caches[t], d_state_new, grads)
        d_inputs[:, t, :] = dx
        d_h = d_h * (1.0 - m) + d_prev[0]
        if cell.kind == "lstm":
            d_c = d_c * (1.0 - m) + d_prev[1]
    return d_inputs, grads


def batch_loss_and_gradients(params: SequenceModelParams, ids, lengths, labels):
    """Mean cross-entropy over the batch and its exact parameter gradients."""
    labels = np.asarray(labels, dtype=np.int64)
    logits, aux = forward_batch(params, ids, lengths, with_caches=True)
    batch = logits.shape[0]
    if labels.shape != (batch,):
        raise ValueError("labels must be (batch,)")
    if labels.min() < 0 or labels.max() >= params.num_classes:
        raise ValueError("label out of range")

    probs = softmax(logits)
    picked = np.maximum(probs[np.arange(batch), labels], PROB_FLOOR)
    loss = float(-np.log(picked).mean())

    d_logits = probs.copy()
    d_logits[np.arange(batch), labels] -= 1.0
    d_logits /= batch

    feat = aux["feat"]
    grads: dict[str, np.ndarray] = {
        "out.w": feat.T @ d_logits,
        "out.b": d_logits.sum(axis=0),
    }
    d_feat = d_logits @ params.w_out.T

    h = params.hidden_dim
    mask = aux["mask"]
    d_inputs, fwd_grads = _backprop_direction(
        params.forward_cell, aux["caches_fwd"], mask, d_feat[:, :h], reverse=False
    )
    for key, val in fwd_grads.items():
        grads[f"fwd.{key}"] = val
    if params.backward_cell is not None:
        d_inputs_bwd, bwd_grads = _backprop_direction(
            params.backward_cell, aux["caches_bwd"], mask, d_feat[:, h:], reverse=True
        )
        d_inputs += d_inputs_bwd
        for key, val in bwd_grads.items():
            grads[f"bwd.{key}"] = val

    d_embedding = np.zeros_like(params.embedding)
    np.add.at(d_embedding, aux["ids"], d_inputs)
    grads["embedding"] = d_embedding
    return loss, grads


def compute_gradients(
    params: SequenceModelParams,
    batch: list[tuple[EncodedExample, int]],
):
    """Gradients of the mean loss over (example, label) pairs.

    Returns (loss, grads) where grads maps catalog names to arrays shaped
    like their parameters.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    width = max(len(ex.ids) for ex, _ in batch)
    ids = np.zeros((len(batch), width), dtype=np.int64)
    lengths = np.zeros(len(batch), dtype=np.int64)
    labels = np.zeros(len(batch), dtype=np.int64)
    for row, (example, label) in enumerate(batch):
        ids[row, : len(example.ids)] = example.ids
        lengths[row] = example.true_length
        labels[row] = label
    return batch_loss_and_gradients(params, ids, lengths, labels)


def batch_mean_loss(params: SequenceModelParams, ids, lengths, labels) -> float:
    """Mean cross-entropy only (the quantity the gradients differentiate)."""
    labels = np.asarray(labels, dtype=np.int64)
    logits, _ = forward_batch(params, ids, lengths)
    probs = softmax(logits)
    picked = np.maximum(probs[np.arange(len(labels)), labels], PROB_FLOOR)
    return float(-np.log(picked).mean())
