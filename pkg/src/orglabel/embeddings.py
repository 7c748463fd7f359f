"""Pre-trained word-vector loading and vocabulary-aligned matrix building."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .textprep import PAD_ID, Vocab

log = logging.getLogger(__name__)

OOV_INIT_RANGE = 0.25


@dataclass
class EmbeddingTable:
    """word -> vector map parsed from a text vector file."""

    vectors: dict[str, np.ndarray]
    dim: int

    def __contains__(self, word):
        return word in self.vectors

    def __len__(self):
        return len(self.vectors)


def load_embeddings(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Parse a text vector file: one word then d decimal reals per line.

    The dimension is inferred from the first line (or checked against
    expected_dim); inconsistent rows and non-numeric fields are errors with
    line numbers, and duplicate words keep their first vector with a warning.
    """
    vectors: dict[str, np.ndarray] = {}
    dim = expected_dim
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            word, fields = parts[0], parts[1:]
            if dim is None:
                if not fields:
                    raise DataFormatError(
                        f"{path}:{line_no}: no vector components"
                    )
                dim = len(fields)
            if len(fields) != dim:
                raise DataFormatError(
                    f"{path}:{line_no}: expected {dim} components, "
                    f"got {len(fields)}"
                )
            try:
                vec = np.array([float(x) for x in fields], dtype=np.float64)
            except ValueError as exc:
                raise DataFormatError(f"{path}:{line_no}: {exc}") from None
            if word in vectors:
                log.warning(
                    "duplicate word %r at %s:%d; keeping first vector",
                    word, path, line_no,
                )
                continue
            vectors[word] = vec
    if dim is None:
        raise DataFormatError(f"{path}: empty vector file")
    return EmbeddingTable(vectors=vectors, dim=dim)


@dataclass
class EmbeddingMatrix:
    """Dense id -> vector table aligned with a vocabulary."""

    matrix: np.ndarray
    trainable: bool
    coverage: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.matrix.shape[0]


def build_matrix(
    vocab: Vocab,
    table: EmbeddingTable | None,
    seed: int = 0,
    dim: int | None = None,
    trainable: bool = True,
) -> EmbeddingMatrix:
    """Stack one row per vocab id: the file vector when present, otherwise a
    uniform draw from [-0.25, 0.25]^d. The PAD row stays exactly zero.

    With no table, every non-PAD row is sampled at the given dimension.
    """
    if table is None:
        if dim is None:
            raise ValueError("dim is required when no embedding table is given")
        d = dim
    else:
        d = table.dim
        if dim is not None and dim != d:
            raise ValueError(f"table dimension {d} does not match requested {dim}")
    rng = np.random.default_rng(seed)
    matrix = np.zeros((len(vocab), d), dtype=np.float64)
    found = 0
    for idx in range(len(vocab)):
        if idx == PAD_ID:
            continue
        token = vocab.token_for(idx)
        if table is not None and token in table.vectors:
            matrix[idx] = table.vectors[token]
            found += 1
        else:
            matrix[idx] = rng.uniform(-OOV_INIT_RANGE, OOV_INIT_RANGE, d)
    coverage = found / len(vocab)
    log.info("embedding coverage: %d/%d tokens (%.3f)", found, len(vocab), coverage)
    return EmbeddingMatrix(matrix=matrix, trainable=trainable, coverage=coverage)
