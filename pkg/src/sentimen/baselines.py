"""Classical comparison models over bag-of-words / TF-IDF features.

All three are written out directly: multinomial Naive Bayes with add-one
smoothing, logistic regression by full-batch gradient descent, and a linear
SVM by Pegasos-style stochastic subgradient descent.  Features come from
the shared Vocabulary so every model sees the identical preprocessing.

TF-IDF convention (pinned because the bare name is ambiguous):
tf = raw count, idf(t) = ln((1+N)/(1+df(t))) + 1, vectors L2-normalized.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ingest import Label
from .vocab import Vocabulary


@dataclass(frozen=True)
class SparseVec:
    """Feature vector stored as (sorted column indices, values)."""
    cols: np.ndarray
    vals: np.ndarray
    dim: int

    def dot(self, dense: np.ndarray) -> float:
        return float(dense[self.cols] @ self.vals)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.cols] = self.vals
        return out


def _column(vocab: Vocabulary, token: str) -> int | None:
    """Feature column for a real token; reserved indices carry no feature."""
    idx = vocab.token_to_index.get(token)
    return None if idx is None else idx - 2


@dataclass
class TfidfVectorizer:
    vocab: Vocabulary
    idf: np.ndarray  # (n_features,)

    @property
    def n_features(self) -> int:
        return self.vocab.size - 2

    @classmethod
    def fit(cls, corpus: Sequence[Sequence[str]], vocab: Vocabulary) -> "TfidfVectorizer":
        n_features = vocab.size - 2
        df = np.zeros(n_features, dtype=np.int64)
        n_docs = 0
        for tokens in corpus:
            n_docs += 1
            seen = {c for t in set(tokens) if (c := _column(vocab, t)) is not None}
            for c in seen:
                df[c] += 1
        idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
        return cls(vocab=vocab, idf=idf)

    def transform(self, tokens: Sequence[str]) -> SparseVec:
        counts = Counter(c for t in tokens if (c := _column(self.vocab, t)) is not None)
        if not counts:
            return SparseVec(np.empty(0, dtype=np.int64), np.empty(0),
                             self.n_features)
        cols = np.array(sorted(counts), dtype=np.int64)
        vals = np.array([counts[c] for c in cols], dtype=np.float64)
        vals *= self.idf[cols]
        norm = np.linalg.norm(vals)
        if norm > 0:
            vals /= norm
        return SparseVec(cols, vals, self.n_features)


# --- multinomial Naive Bayes -------------------------------------------------

@dataclass
class NaiveBayesModel:
    log_priors: np.ndarray       # (C,)
    log_likelihoods: np.ndarray  # (C, n_features), Laplace alpha=1

    def log_posteriors(self, counts: SparseVec) -> np.ndarray:
        scores = self.log_priors + (self.log_likelihoods[:, counts.cols]
                                    @ counts.vals)
        return scores - _logsumexp(scores)

    def predict(self, counts: SparseVec) -> Label:
        scores = self.log_priors + (self.log_likelihoods[:, counts.cols]
                                    @ counts.vals)
        return Label(int(np.argmax(scores)))  # argmax ties resolve to Negative


def _logsumexp(x: np.ndarray) -> float:
    m = float(np.max(x))
    return m + math.log(float(np.exp(x - m).sum()))


def count_vector(tokens: Sequence[str], vocab: Vocabulary) -> SparseVec:
    counts = Counter(c for t in tokens if (c := _column(vocab, t)) is not None)
    cols = np.array(sorted(counts), dtype=np.int64)
    vals = np.array([counts[c] for c in cols], dtype=np.float64)
    return SparseVec(cols, vals, vocab.size - 2)


def nb_fit(docs: Sequence[Sequence[str]], labels: Sequence[int | Label],
           vocab: Vocabulary, alpha: float = 1.0) -> NaiveBayesModel:
    n_features = vocab.size - 2
    n_classes = 2
    class_counts = np.zeros(n_classes)
    word_counts = np.zeros((n_classes, n_features))
    for tokens, label in zip(docs, labels):
        label = int(label)
        class_counts[label] += 1
        for t in tokens:
            c = _column(vocab, t)
            if c is not None:
                word_counts[label, c] += 1
    if class_counts.sum() == 0:
        raise ValueError("no training documents")
    with np.errstate(divide="ignore"):
        # a class with no documents gets a -inf prior: never predicted
        log_priors = np.log(class_counts / class_counts.sum())
    smoothed = word_counts + alpha
    log_likelihoods = np.log(smoothed / smoothed.sum(axis=1, keepdims=True))
    return NaiveBayesModel(log_priors, log_likelihoods)


# --- linear models (logistic / hinge) ----------------------------------------

@dataclass
class LinearModel:
    w: np.ndarray
    b: float
    objective: str  # "logistic" | "hinge"

    def score(self, x: SparseVec) -> float:
        return x.dot(self.w) + self.b

    def predict(self, x: SparseVec) -> Label:
        # sign rule with ties to Negative: positive score means Positive
        return Label.POSITIVE if self.score(x) > 0 else Label.NEGATIVE


def _neg_sigmoid(margin: float) -> float:
    """1 / (1 + e^margin) without overflow."""
    if margin >= 0:
        e = math.exp(-margin)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(margin))


def logistic_loss_and_grad(w: np.ndarray, b: float, xs: Sequence[SparseVec],
                           ys: np.ndarray, l2: float,
                           ) -> tuple[float, np.ndarray, float]:
    """L2-regularized mean log loss with y in {-1, +1}."""
    n = len(xs)
    grad_w = l2 * w
    grad_b = 0.0
    data_loss = 0.0
    for x, y in zip(xs, ys):
        margin = y * (x.dot(w) + b)
        # log(1 + e^-m), stable for both signs of m
        data_loss += math.log1p(math.exp(-abs(margin))) + max(0.0, -margin)
        s = -y * _neg_sigmoid(margin)
        grad_w[x.cols] += (s / n) * x.vals
        grad_b += s / n
    loss = data_loss / n + 0.5 * l2 * float(w @ w)
    return loss, grad_w, grad_b


def linear_fit(xs: Sequence[SparseVec], labels: Sequence[int | Label],
               objective: str = "logistic", l2: float = 1e-4,
               lr: float = 1.0, epochs: int = 200, seed: int = 0) -> LinearModel:
    """Logistic: full-batch gradient descent.  Hinge: Pegasos SGD."""
    if objective not in ("logistic", "hinge"):
        raise ValueError(f"unknown objective {objective!r}")
    dim = xs[0].dim if xs else 0
    ys = np.array([1.0 if int(l) == 1 else -1.0 for l in labels])
    w = np.zeros(dim)
    b = 0.0
    if objective == "logistic":
        for _ in range(epochs):
            loss, grad_w, grad_b = logistic_loss_and_grad(w, b, xs, ys, l2)
            w -= lr * grad_w
            b -= lr * grad_b
            if not np.all(np.isfinite(w)) or not math.isfinite(b):
                raise FloatingPointError("logistic regression diverged")
    else:
        rng = np.random.default_rng((seed, 3))
        lam = max(l2, 1e-12)
        t = 0
        for _ in range(epochs):
            for j in rng.permutation(len(xs)):
                t += 1
                eta = 1.0 / (lam * t)
                x, y = xs[j], ys[j]
                margin = y * (x.dot(w) + b)
                w *= (1.0 - eta * lam)
                if margin < 1.0:
                    w[x.cols] += eta * y * x.vals
                    b += eta * y
            if not np.all(np.isfinite(w)):
                raise FloatingPointError("SVM training diverged")
    return LinearModel(w=w, b=b, objective=objective)


# --- model comparison ---------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    model: str
    accuracy: float
    macro_f1: float


def majority_class(labels: Sequence[int | Label]) -> Label:
    counts = Counter(int(l) for l in labels)
    # ties to Negative
    return Label(max(sorted(counts), key=lambda k: counts[k]))


def compare_models(rows: Iterable[ComparisonRow]) -> str:
    """Aligned text table, 4-decimal metrics."""
    rows = list(rows)
    width = max([len("model")] + [len(r.model) for r in rows])
    lines = [f"{'model':<{width}}  accuracy  macro_f1"]
    for r in rows:
        lines.append(f"{r.model:<{width}}  {r.accuracy:8.4f}  {r.macro_f1:8.4f}")
    return "\n".join(lines)


def _row(name: str, preds: Sequence[Label],
         truth: Sequence[int | Label]) -> ComparisonRow:
    from .evaluation import report
    rep = report(preds, truth)
    return ComparisonRow(model=name, accuracy=rep.accuracy, macro_f1=rep.macro_f1)


def run_comparison(train_docs: Sequence[Sequence[str]],
                   train_labels: Sequence[int | Label],
                   test_docs: Sequence[Sequence[str]],
                   test_labels: Sequence[int | Label],
                   vocab: Vocabulary, seed: int = 0,
                   include: Sequence[str] = ("majority", "naive_bayes",
                                             "logistic_regression", "linear_svm"),
                   ) -> list[ComparisonRow]:
    """Fit each classical model on identical features and score the test set."""
    rows = []
    if "majority" in include:
        major = majority_class(train_labels)
        rows.append(_row("majority", [major] * len(test_labels), test_labels))
    if "naive_bayes" in include:
        model = nb_fit(train_docs, train_labels, vocab)
        preds = [model.predict(count_vector(d, vocab)) for d in test_docs]
        rows.append(_row("naive_bayes", preds, test_labels))
    if {"logistic_regression", "linear_svm"} & set(include):
        vectorizer = TfidfVectorizer.fit(train_docs, vocab)
        train_x = [vectorizer.transform(d) for d in train_docs]
        test_x = [vectorizer.transform(d) for d in test_docs]
        if "logistic_regression" in include:
            lr_model = linear_fit(train_x, train_labels, objective="logistic",
                                  l2=1e-4, lr=1.0, epochs=200, seed=seed)
            rows.append(_row("logistic_regression",
                             [lr_model.predict(x) for x in test_x], test_labels))
        if "linear_svm" in include:
            svm = linear_fit(train_x, train_labels, objective="hinge",
                             l2=1e-4, epochs=30, seed=seed)
            rows.append(_row("linear_svm",
                             [svm.predict(x) for x in test_x], test_labels))
    return rows
