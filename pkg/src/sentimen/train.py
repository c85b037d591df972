"""Mini-batch training loop with per-epoch history and checkpointing.

Flat schedule: no early stopping, no learning-rate decay.  All randomness
(shuffling, dropout) derives from the config seed, so a rerun with the same
seed and data reproduces the history bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import nn
from .ingest import Label
from .vocab import EncodedSequence

# rng stream ids, combined with (seed, ...) so streams never collide
_STREAM_SHUFFLE = 1
_STREAM_DROPOUT = 2


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    learning_rate: float = 5e-4
    epochs: int = 20
    seed: int = 0
    class_weights: tuple[float, ...] | None = None
    shuffle: bool = True

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.class_weights is not None and any(w <= 0 for w in self.class_weights):
            raise ValueError("class weights must be positive")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass(frozen=True)
class EncodedDataset:
    """Column-wise view of an encoded corpus: (N, T) indices + lengths + labels."""
    indices: np.ndarray
    lengths: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return self.indices.shape[0]

    @classmethod
    def from_sequences(cls, seqs: Sequence[EncodedSequence],
                       labels: Sequence[int | Label]) -> "EncodedDataset":
        if len(seqs) != len(labels):
            raise ValueError("sequence/label count mismatch")
        return cls(indices=np.stack([s.indices for s in seqs]),
                   lengths=np.array([s.true_length for s in seqs], dtype=np.int64),
                   labels=np.array([int(l) for l in labels], dtype=np.int64))


def batch_iter(ds: EncodedDataset, batch_size: int, shuffle: bool,
               seed: int, epoch_index: int) -> Iterator[EncodedDataset]:
    """Deterministic batches; the final short batch is kept."""
    n = len(ds)
    if n == 0:
        raise ValueError("empty dataset")
    if shuffle:
        order = np.random.default_rng((seed, _STREAM_SHUFFLE,
                                       epoch_index)).permutation(n)
    else:
        order = np.arange(n)
    for start in range(0, n, batch_size):
        sel = order[start:start + batch_size]
        yield EncodedDataset(ds.indices[sel], ds.lengths[sel], ds.labels[sel])


def evaluate_split(params: nn.ModelParams, ds: EncodedDataset,
                   batch_size: int = 256) -> tuple[float, float]:
    """(mean loss, accuracy) in inference mode."""
    if len(ds) == 0:
        raise ValueError("empty dataset")
    total_loss = 0.0
    correct = 0
    for start in range(0, len(ds), batch_size):
        idx = ds.indices[start:start + batch_size]
        lengths = ds.lengths[start:start + batch_size]
        labels = ds.labels[start:start + batch_size]
        logits = nn.forward_logits(params, idx, lengths)
        shifted = logits - logits.max(axis=1, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=1))
        losses = lse - shifted[np.arange(len(labels)), labels]
        total_loss += float(losses.sum(dtype=np.float64))
        correct += int((logits.argmax(axis=1) == labels).sum())
    return total_loss / len(ds), correct / len(ds)


def weighted_loss(logits: np.ndarray, label: int,
                  class_weights: Sequence[float]) -> float:
    """Single-example cross-entropy scaled by its class weight."""
    loss, _ = nn.cross_entropy(logits, label)
    return float(class_weights[label]) * loss


def inverse_frequency_weights(counts: Sequence[int]) -> np.ndarray:
    """w_k = N / (C * n_k); the usual balanced-class weighting."""
    counts = np.asarray(counts, dtype=np.float64)
    if np.any(counts <= 0):
        raise ValueError("every class needs at least one example")
    return counts.sum() / (len(counts) * counts)


@dataclass
class TrainResult:
    history: list[EpochStats]
    best_epoch: int | None
    best_params: nn.ModelParams | None
    final_params: nn.ModelParams


def _clone_params(params: nn.ModelParams) -> nn.ModelParams:
    return nn.ModelParams(
        config=params.config,
        embedding=nn.EmbeddingLayer(params.embedding.weights.copy()),
        cell=nn.LstmCell(params.cell.w_ih.copy(), params.cell.w_hh.copy(),
                         params.cell.b_ih.copy(), params.cell.b_hh.copy()),
        dense=nn.DenseLayer(params.dense.w.copy(), params.dense.b.copy()),
    )


def train(params: nn.ModelParams, train_set: EncodedDataset,
          val_set: EncodedDataset | None, cfg: TrainConfig,
          log=None) -> TrainResult:
    """Run the full schedule; returns history plus best/final parameters.

    Best = highest validation accuracy, ties to the earlier epoch.  With no
    validation set the training metrics stand in for the validation columns.
    """
    adam = nn.AdamState.for_params(params)
    drop_rng = np.random.default_rng((cfg.seed, _STREAM_DROPOUT))
    weights = (np.asarray(cfg.class_weights, dtype=np.float64)
               if cfg.class_weights is not None else None)

    history: list[EpochStats] = []
    best_epoch: int | None = None
    best_acc = -1.0
    best_params: nn.ModelParams | None = None

    for epoch in range(cfg.epochs):
        epoch_loss = 0.0
        correct = 0
        for batch_no, batch in enumerate(batch_iter(train_set, cfg.batch_size,
                                                    cfg.shuffle, cfg.seed,
                                                    epoch)):
            grads, loss = nn.backward(params, batch.indices, batch.lengths,
                                      batch.labels, rng=drop_rng,
                                      training=True, class_weights=weights)
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"non-finite loss at epoch {epoch}, batch {batch_no}")
            nn.adam_step(params, grads, adam, cfg.learning_rate)
            epoch_loss += loss * len(batch)
            logits = nn.forward_logits(params, batch.indices, batch.lengths)
            correct += int((logits.argmax(axis=1) == batch.labels).sum())
        train_loss = epoch_loss / len(train_set)
        train_acc = correct / len(train_set)

        if val_set is not None and len(val_set):
            val_loss, val_acc = evaluate_split(params, val_set)
        else:
            val_loss, val_acc = train_loss, train_acc
        history.append(EpochStats(epoch, train_loss, train_acc,
                                  val_loss, val_acc))
        if log is not None:
            print(f"epoch {epoch:3d}  train_loss {train_loss:.4f}  "
                  f"train_acc {train_acc:.4f}  val_loss {val_loss:.4f}  "
                  f"val_acc {val_acc:.4f}", file=log)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_params = _clone_params(params)

    return TrainResult(history=history, best_epoch=best_epoch,
                       best_params=best_params, final_params=params)


def save_history_csv(history: Sequence[EpochStats], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "train_acc",
                         "val_loss", "val_acc"])
        for s in history:
            writer.writerow([s.epoch, repr(s.train_loss), repr(s.train_accuracy),
                             repr(s.val_loss), repr(s.val_accuracy)])


def load_history_csv(path: str | Path) -> list[EpochStats]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(EpochStats(int(row["epoch"]), float(row["train_loss"]),
                                  float(row["train_acc"]), float(row["val_loss"]),
                                  float(row["val_acc"])))
    return out
