"""Text normalization and token encoding.

Snippets are reduced to lowercase alphanumeric tokens (strip symbols,
lowercase, split, lemmatize), then mapped to fixed-length id sequences
against a frequency-built vocabulary. Id 0 is reserved for padding and id 1
for out-of-vocabulary tokens; neither token string can be produced by
normalization, so the reservation is collision-free.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

_NON_ALNUM = re.compile(r"[^0-9a-zA-Z]+")
_VOWELS = frozenset("aeiouy")

# Ordered suffix rules: (suffix, replacement, minimum token length, result
# must keep a vowel). The first matching rule fires; the table is reapplied
# until no rule fires, so lemmatization is a fixpoint and normalize stays
# idempotent on its own output. Every rule strictly shortens the token.
_SUFFIX_RULES = (
    ("ies", "y", 5, False),
    ("sses", "ss", 0, False),
    ("ing", "", 6, True),
    ("ed", "", 5, True),
    ("s", "", 4, False),
)


def _apply_first_rule(token: str) -> str | None:
    for suffix, replacement, min_len, need_vowel in _SUFFIX_RULES:
        if not token.endswith(suffix):
            continue
        if len(token) < min_len:
            continue
        if suffix == "s" and token.endswith(("ss", "us", "is")):
            continue
        result = token[: len(token) - len(suffix)] + replacement
        if not result:
            continue
        if need_vowel and not _VOWELS.intersection(result):
            continue
        return result
    return None


def lemmatize(token: str) -> str:
    """Reduce one lowercase alphanumeric token with the fixed suffix table."""
    while (reduced := _apply_first_rule(token)) is not None:
        token = reduced
    return token


def normalize(text: str) -> list[str]:
    """Strip non-alphanumerics, lowercase, split, lemmatize; drop empties."""
    cleaned = _NON_ALNUM.sub(" ", text).lower()
    return [lemmatize(tok) for tok in cleaned.split()]


@dataclass
class Vocab:
    """Token-to-id map with reserved PAD (0) and UNK (1) entries."""

    token_to_id: dict[str, int]
    min_freq: int = 1
    id_to_token: list[str] = field(init=False, repr=False)

    def __post_init__(self):
        if self.token_to_id.get(PAD_TOKEN) != PAD_ID:
            raise ValueError(f"vocab must map {PAD_TOKEN!r} to {PAD_ID}")
        if self.token_to_id.get(UNK_TOKEN) != UNK_ID:
            raise ValueError(f"vocab must map {UNK_TOKEN!r} to {UNK_ID}")
        ids = sorted(self.token_to_id.values())
        if ids != list(range(len(ids))):
            raise ValueError("vocab ids must be contiguous from 0")
        self.id_to_token = [""] * len(self.token_to_id)
        for token, idx in self.token_to_id.items():
            self.id_to_token[idx] = token

    def __len__(self):
        return len(self.token_to_id)

    def __contains__(self, token):
        return token in self.token_to_id

    def id_for(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token_for(self, idx: int) -> str:
        return self.id_to_token[idx]

    def save(self, path):
        Path(path).write_text(
            json.dumps(self.token_to_id, ensure_ascii=False, sort_keys=True, indent=0)
            + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path):
        mapping = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(token_to_id={str(k): int(v) for k, v in mapping.items()})

    def content_hash(self) -> str:
        import hashlib

        canonical = json.dumps(self.token_to_id, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_vocab(corpus: list[list[str]], min_freq: int = 2) -> Vocab:
    """Assign ids 2.. to tokens with frequency >= min_freq.

    Ordering is (descending frequency, ascending token), so the mapping is
    reproducible for identical corpora.
    """
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    freq = Counter()
    for tokens in corpus:
        freq.update(tokens)
    kept = sorted(
        (tok for tok, n in freq.items() if n >= min_freq),
        key=lambda tok: (-freq[tok], tok),
    )
    token_to_id = {PAD_TOKEN: PAD_ID, UNK_TOKEN: UNK_ID}
    for idx, tok in enumerate(kept, start=2):
        token_to_id[tok] = idx
    return Vocab(token_to_id=token_to_id, min_freq=min_freq)


@dataclass(frozen=True)
class EncodedExample:
    """Fixed-length id sequence with its unpadded length."""

    ids: np.ndarray
    true_length: int

    def __post_init__(self):
        if self.ids.ndim != 1:
            raise ValueError("ids must be a 1-D array")
        if not 0 <= self.true_length <= len(self.ids):
            raise ValueError("true_length out of range")


def encode_pad(tokens: list[str], vocab: Vocab, maxlen: int = 200) -> EncodedExample:
    """Map tokens to ids, truncate to maxlen keeping the prefix, right-pad."""
    if maxlen < 1:
        raise ValueError("maxlen must be >= 1")
    ids = np.full(maxlen, PAD_ID, dtype=np.int64)
    kept = tokens[:maxlen]
    for i, tok in enumerate(kept):
        ids[i] = vocab.id_for(tok)
    return EncodedExample(ids=ids, true_length=len(kept))


def decode(example: EncodedExample, vocab: Vocab) -> list[str]:
    """Recover the (possibly truncated) in-vocab token prefix."""
    return [vocab.token_for(int(i)) for i in example.ids[: example.true_length]]


def encode_corpus(
    corpus: list[list[str]], vocab: Vocab, maxlen: int = 200
) -> tuple[np.ndarray, np.ndarray]:
    """Encode many documents into stacked (ids, lengths) arrays."""
    ids = np.full((len(corpus), maxlen), PAD_ID, dtype=np.int64)
    lengths = np.zeros(len(corpus), dtype=np.int64)
    for row, tokens in enumerate(corpus):
        enc = encode_pad(tokens, vocab, maxlen)
        ids[row] = enc.ids
        lengths[row] = enc.true_length
    return ids, lengths
