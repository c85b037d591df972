"""Token <-> integer index mapping with reserved PAD (0) and OOV (1) indices.

Real tokens occupy indices 2..size-1, assigned by descending training-corpus
frequency with lexicographic tie-breaks, so building is deterministic.
Sequences are truncated to the first ``max_len`` tokens and post-padded with
zeros; ``true_length`` records how many positions are real.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAD_INDEX = 0
OOV_INDEX = 1
OOV_TOKEN = "⟨unk⟩"  # decode-side sentinel only, never a real token


@dataclass(frozen=True)
class Vocabulary:
    token_to_index: dict[str, int]
    index_to_token: dict[int, str]

    @property
    def size(self) -> int:
        """Number of indices including the two reserved ones."""
        return len(self.token_to_index) + 2

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, OOV_INDEX)


@dataclass(frozen=True)
class EncodedSequence:
    indices: np.ndarray  # int64, fixed length
    true_length: int

    def __post_init__(self):
        if self.true_length < 0:
            raise ValueError("negative true_length")
        if np.any(self.indices[self.true_length:] != PAD_INDEX):
            raise ValueError("non-pad entries beyond true_length")


def build_vocab(corpus: Iterable[Sequence[str]], min_freq: int = 1) -> Vocabulary:
    """Index tokens of frequency >= min_freq by (-frequency, token)."""
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    freq = Counter()
    n_docs = 0
    for tokens in corpus:
        n_docs += 1
        freq.update(tokens)
    if n_docs == 0:
        raise ValueError("empty corpus")
    kept = sorted((t for t, n in freq.items() if n >= min_freq),
                  key=lambda t: (-freq[t], t))
    token_to_index = {t: i + 2 for i, t in enumerate(kept)}
    index_to_token = {i: t for t, i in token_to_index.items()}
    return Vocabulary(token_to_index, index_to_token)


def encode(tokens: Sequence[str], vocab: Vocabulary, max_len: int) -> EncodedSequence:
    """First ``max_len`` tokens as indices, zero-padded to exactly max_len."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    indices = np.zeros(max_len, dtype=np.int64)
    kept = tokens[:max_len]
    for i, tok in enumerate(kept):
        indices[i] = vocab.index(tok)
    return EncodedSequence(indices, len(kept))


def decode(seq: EncodedSequence, vocab: Vocabulary) -> list[str]:
    """Inverse of encode for real indices; PAD dropped, OOV -> sentinel."""
    out = []
    for idx in seq.indices[:seq.true_length]:
        idx = int(idx)
        if idx == PAD_INDEX:
            continue
        if idx == OOV_INDEX:
            out.append(OOV_TOKEN)
            continue
        if idx >= vocab.size:
            raise IndexError(f"index {idx} out of range for vocabulary "
                             f"of size {vocab.size}")
        out.append(vocab.index_to_token[idx])
    return out


def suggest_max_len(corpus: Iterable[Sequence[str]], percentile: float = 95.0,
                    cap: int = 100) -> int:
    """95th percentile of token counts, capped; sequence length default."""
    lengths = [len(t) for t in corpus]
    if not lengths:
        raise ValueError("empty corpus")
    return max(1, min(cap, int(np.ceil(np.percentile(lengths, percentile)))))


def save_vocab(vocab: Vocabulary, path: str | Path, max_len: int,
               min_freq: int = 1) -> None:
    """Line k holds the token for index k+1 (reserved indices implicit);
    a ``<path>.meta`` sidecar records max_len and min_freq."""
    path = Path(path)
    tokens = [vocab.index_to_token[i] for i in range(2, vocab.size)]
    path.write_text("\n".join(tokens) + ("\n" if tokens else ""), "utf-8")
    Path(str(path) + ".meta").write_text(
        f"max_len={max_len}\nmin_freq={min_freq}\n", "utf-8")


def load_vocab(path: str | Path) -> tuple[Vocabulary, int, int]:
    path = Path(path)
    tokens = [t for t in path.read_text("utf-8").split("\n") if t]
    token_to_index = {t: i + 2 for i, t in enumerate(tokens)}
    meta: dict[str, str] = {}
    for line in Path(str(path) + ".meta").read_text("utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            meta[key.strip()] = value.strip()
    vocab = Vocabulary(token_to_index, {i: t for t, i in token_to_index.items()})
    return vocab, int(meta["max_len"]), int(meta.get("min_freq", "1"))
