"""Numeric core: embedding + single-layer LSTM + dense softmax classifier.

Everything is plain numpy with hand-derived reverse-mode gradients; gate
blocks along the 4H axis are ordered [input i, forget f, candidate g,
output o].  Two separate bias vectors (b_ih and b_hh) are kept so the
parameter count matches the double-bias convention:

    V*E + 4*(E*H + H*H + 2H) + (H*C + C)

Padded positions are handled with a 0/1 carry-forward mask, so forward and
backward results on a padded sequence are bit-identical to the unpadded run
and the pad embedding row stays frozen at zero.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import Label
from .vocab import EncodedSequence, Vocabulary, encode

GATE_ORDER = "ifgo"


class CheckpointError(Exception):
    pass


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    out = np.empty_like(x, dtype=x.dtype)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax along the last axis; safe for huge logits."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Fused -log softmax(logits)[label]; also returns d(loss)/d(logits)."""
    z = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < z.shape[-1]:
        raise ValueError(f"label {label} out of range for {z.shape[-1]} classes")
    z = z - z.max()
    lse = np.log(np.exp(z).sum())
    loss = float(lse - z[label])
    grad = np.exp(z - lse)
    grad[label] -= 1.0
    return loss, grad


def count_parameters(vocab_size: int, embed_dim: int, hidden_dim: int,
                     num_classes: int) -> int:
    if min(vocab_size, embed_dim, hidden_dim, num_classes) < 1:
        raise ValueError("all dimensions must be >= 1")
    v, e, h, c = vocab_size, embed_dim, hidden_dim, num_classes
    return v * e + 4 * (e * h + h * h + 2 * h) + (h * c + c)


# --- parameter containers --------------------------------------------------

@dataclass
class EmbeddingLayer:
    weights: np.ndarray  # (V, E); row 0 is PAD and stays zero


@dataclass
class LstmCell:
    w_ih: np.ndarray  # (4H, E)
    w_hh: np.ndarray  # (4H, H)
    b_ih: np.ndarray  # (4H,)
    b_hh: np.ndarray  # (4H,)

    @property
    def hidden_dim(self) -> int:
        return self.w_hh.shape[1]


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray


@dataclass
class DenseLayer:
    w: np.ndarray  # (C, H)
    b: np.ndarray  # (C,)


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embed_dim: int = 128
    hidden_dim: int = 128
    num_classes: int = 2
    max_len: int = 100
    # the stated per-LSTM-layer rate is inert in a single-layer stack, so it
    # defaults to off; enabling it applies dropout to the final hidden state
    lstm_dropout: float = 0.0
    fc_dropout: float = 0.5


@dataclass
class ModelParams:
    config: ModelConfig
    embedding: EmbeddingLayer
    cell: LstmCell
    dense: DenseLayer

    def arrays(self) -> dict[str, np.ndarray]:
        """Parameter arrays in the fixed serialization order."""
        return {
            "embedding": self.embedding.weights,
            "w_ih": self.cell.w_ih,
            "w_hh": self.cell.w_hh,
            "b_ih": self.cell.b_ih,
            "b_hh": self.cell.b_hh,
            "w_out": self.dense.w,
            "b_out": self.dense.b,
        }

    def n_parameters(self) -> int:
        return sum(a.size for a in self.arrays().values())


def init_params(config: ModelConfig, seed: int = 0,
                dtype=np.float64) -> ModelParams:
    """Uniform +-1/sqrt(H) weights (+-1/sqrt(E) embedding), zero biases,
    pad embedding row zeroed."""
    rng = np.random.default_rng((seed, 0))
    v, e = config.vocab_size, config.embed_dim
    h, c = config.hidden_dim, config.num_classes
    lim_e, lim_h = 1.0 / np.sqrt(e), 1.0 / np.sqrt(h)
    emb = rng.uniform(-lim_e, lim_e, size=(v, e)).astype(dtype)
    emb[0] = 0.0
    params = ModelParams(
        config=config,
        embedding=EmbeddingLayer(emb),
        cell=LstmCell(
            w_ih=rng.uniform(-lim_h, lim_h, size=(4 * h, e)).astype(dtype),
            w_hh=rng.uniform(-lim_h, lim_h, size=(4 * h, h)).astype(dtype),
            b_ih=np.zeros(4 * h, dtype=dtype),
            b_hh=np.zeros(4 * h, dtype=dtype),
        ),
        dense=DenseLayer(
            w=rng.uniform(-lim_h, lim_h, size=(c, h)).astype(dtype),
            b=np.zeros(c, dtype=dtype),
        ),
    )
    if config.lstm_dropout > 0:
        warnings.warn("lstm_dropout > 0: the reference single-layer setup "
                      "leaves this rate inert; enabling it changes behavior",
                      stacklevel=2)
    return params


# --- single-sequence operations (contract surface + oracles) ---------------

def embed_forward(seq: EncodedSequence, emb: EmbeddingLayer) -> np.ndarray:
    """Row lookup: output[t] = weights[seq.indices[t]]."""
    if np.any(seq.indices >= emb.weights.shape[0]) or np.any(seq.indices < 0):
        raise IndexError("sequence index out of embedding range")
    return emb.weights[seq.indices]


def lstm_step(x: np.ndarray, state: LstmState, cell: LstmCell) -> LstmState:
    """One gate update: c' = f*c + i*g, h' = o*tanh(c')."""
    h_dim = cell.hidden_dim
    if x.shape[-1] != cell.w_ih.shape[1]:
        raise ValueError(f"input dim {x.shape[-1]} != {cell.w_ih.shape[1]}")
    a = cell.w_ih @ x + cell.w_hh @ state.h + cell.b_ih + cell.b_hh
    i = sigmoid(a[:h_dim])
    f = sigmoid(a[h_dim:2 * h_dim])
    g = np.tanh(a[2 * h_dim:3 * h_dim])
    o = sigmoid(a[3 * h_dim:])
    c_new = f * state.c + i * g
    h_new = o * np.tanh(c_new)
    return LstmState(h_new, c_new)


def lstm_forward(vectors: np.ndarray, true_length: int, cell: LstmCell) -> LstmState:
    """Iterate lstm_step over the first ``true_length`` positions only."""
    if true_length > len(vectors):
        raise ValueError("true_length exceeds sequence length")
    h_dim = cell.hidden_dim
    dtype = cell.w_ih.dtype
    state = LstmState(np.zeros(h_dim, dtype=dtype), np.zeros(h_dim, dtype=dtype))
    for t in range(true_length):
        state = lstm_step(vectors[t], state, cell)
    return state


def dense_forward(h: np.ndarray, dense: DenseLayer) -> np.ndarray:
    if h.shape[-1] != dense.w.shape[1]:
        raise ValueError(f"hidden dim {h.shape[-1]} != {dense.w.shape[1]}")
    return h @ dense.w.T + dense.b


def dropout_mask(shape, rate: float, rng: np.random.Generator,
                 dtype=np.float64) -> np.ndarray:
    """Inverted-dropout multiplier: 0 with probability rate, else 1/(1-rate)."""
    if not 0 <= rate < 1:
        raise ValueError("dropout rate must be in [0, 1)")
    if rate == 0:
        return np.ones(shape, dtype=dtype)
    keep = (rng.random(shape) >= rate).astype(dtype)
    return keep / (1.0 - rate)


def dropout(x: np.ndarray, rate: float, training: bool,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Identity at inference; inverted dropout during training."""
    if not training or rate == 0:
        if not 0 <= rate < 1:
            raise ValueError("dropout rate must be in [0, 1)")
        return x
    if rng is None:
        raise ValueError("training-mode dropout needs an rng")
    return x * dropout_mask(x.shape, rate, rng, dtype=x.dtype)


# --- batched forward/backward ----------------------------------------------

def _batch_mask(lengths: np.ndarray, seq_len: int, dtype) -> np.ndarray:
    return (np.arange(seq_len)[None, :] < lengths[:, None]).astype(dtype)


def _lstm_forward_batch(params: ModelParams, indices: np.ndarray,
                        lengths: np.ndarray) -> dict:
    """Unrolled masked forward over (B, T) index arrays; caches everything
    the backward pass reuses."""
    cell = params.cell
    h_dim = cell.hidden_dim
    dtype = cell.w_ih.dtype
    batch, seq_len = indices.shape
    x = params.embedding.weights[indices]            # (B, T, E)
    mask = _batch_mask(lengths, seq_len, dtype)      # (B, T)

    h_states = np.zeros((seq_len + 1, batch, h_dim), dtype=dtype)
    c_states = np.zeros((seq_len + 1, batch, h_dim), dtype=dtype)
    gates = np.zeros((seq_len, batch, 4 * h_dim), dtype=dtype)
    c_raw = np.zeros((seq_len, batch, h_dim), dtype=dtype)
    tanh_c = np.zeros((seq_len, batch, h_dim), dtype=dtype)

    bias = cell.b_ih + cell.b_hh
    for t in range(seq_len):
        a = x[:, t, :] @ cell.w_ih.T + h_states[t] @ cell.w_hh.T + bias
        i = sigmoid(a[:, :h_dim])
        f = sigmoid(a[:, h_dim:2 * h_dim])
        g = np.tanh(a[:, 2 * h_dim:3 * h_dim])
        o = sigmoid(a[:, 3 * h_dim:])
        gates[t] = np.concatenate([i, f, g, o], axis=1)
        c_raw[t] = f * c_states[t] + i * g
        tanh_c[t] = np.tanh(c_raw[t])
        h_raw = o * tanh_c[t]
        m = mask[:, t:t + 1]
        c_states[t + 1] = m * c_raw[t] + (1.0 - m) * c_states[t]
        h_states[t + 1] = m * h_raw + (1.0 - m) * h_states[t]

    return {"x": x, "mask": mask, "h_states": h_states, "c_states": c_states,
            "gates": gates, "c_raw": c_raw, "tanh_c": tanh_c,
            "indices": indices}


def _lstm_backward_batch(params: ModelParams, cache: dict,
                         d_h_final: np.ndarray) -> dict[str, np.ndarray]:
    cell = params.cell
    h_dim = cell.hidden_dim
    x, mask = cache["x"], cache["mask"]
    h_states, c_states = cache["h_states"], cache["c_states"]
    gates, c_raw, tanh_c = cache["gates"], cache["c_raw"], cache["tanh_c"]
    batch, seq_len, _ = x.shape
    dtype = cell.w_ih.dtype

    d_w_ih = np.zeros_like(cell.w_ih)
    d_w_hh = np.zeros_like(cell.w_hh)
    d_b = np.zeros_like(cell.b_ih)
    d_x = np.zeros_like(x)

    dh = d_h_final.astype(dtype, copy=True)
    dc = np.zeros((batch, h_dim), dtype=dtype)
    for t in range(seq_len - 1, -1, -1):
        m = mask[:, t:t + 1]
        i = gates[t][:, :h_dim]
        f = gates[t][:, h_dim:2 * h_dim]
        g = gates[t][:, 2 * h_dim:3 * h_dim]
        o = gates[t][:, 3 * h_dim:]

        dh_raw = m * dh
        dh_carry = (1.0 - m) * dh
        dc_raw = m * dc
        dc_carry = (1.0 - m) * dc

        d_o = dh_raw * tanh_c[t]
        dc_total = dc_raw + dh_raw * o * (1.0 - tanh_c[t] ** 2)
        d_f = dc_total * c_states[t]
        d_i = dc_total * g
        d_g = dc_total * i

        da = np.concatenate([
            d_i * i * (1.0 - i),
            d_f * f * (1.0 - f),
            d_g * (1.0 - g ** 2),
            d_o * o * (1.0 - o),
        ], axis=1)

        d_w_ih += da.T @ x[:, t, :]
        d_w_hh += da.T @ h_states[t]
        d_b += da.sum(axis=0)
        d_x[:, t, :] = da @ cell.w_ih
        dh = da @ cell.w_hh + dh_carry
        dc = dc_total * f + dc_carry

    d_emb = np.zeros_like(params.embedding.weights)
    np.add.at(d_emb, cache["indices"].reshape(-1),
              d_x.reshape(-1, d_x.shape[-1]))
    d_emb[0] = 0.0  # pad row frozen
    return {"embedding": d_emb, "w_ih": d_w_ih, "w_hh": d_w_hh,
            "b_ih": d_b, "b_hh": d_b.copy()}


def forward_logits(params: ModelParams, indices: np.ndarray,
                   lengths: np.ndarray) -> np.ndarray:
    """Inference-mode logits for a (B, T) batch; dropout off."""
    cache = _lstm_forward_batch(params, indices, lengths)
    h_final = cache["h_states"][-1]
    return h_final @ params.dense.w.T + params.dense.b


def backward(params: ModelParams, indices: np.ndarray, lengths: np.ndarray,
             labels: np.ndarray, rng: np.random.Generator | None = None,
             training: bool = True,
             class_weights: np.ndarray | None = None,
             ) -> tuple[dict[str, np.ndarray], float]:
    """Full reverse-mode pass; returns (gradients, batch loss).

    Loss is the (optionally class-weight normalized) mean of per-example
    fused softmax cross-entropies; gradients match that reduction.
    """
    if indices.shape[0] == 0:
        raise ValueError("empty batch")
    cfg = params.config
    cache = _lstm_forward_batch(params, indices, lengths)
    h_final = cache["h_states"][-1]
    dtype = h_final.dtype

    lstm_mult = np.ones_like(h_final)
    fc_mult = np.ones_like(h_final)
    if training and (cfg.lstm_dropout > 0 or cfg.fc_dropout > 0) and rng is None:
        raise ValueError("training with dropout needs an rng")
    if training and cfg.lstm_dropout > 0:
        lstm_mult = dropout_mask(h_final.shape, cfg.lstm_dropout, rng, dtype)
    if training and cfg.fc_dropout > 0:
        fc_mult = dropout_mask(h_final.shape, cfg.fc_dropout, rng, dtype)
    h_drop = h_final * lstm_mult * fc_mult

    logits = h_drop @ params.dense.w.T + params.dense.b
    probs = softmax(logits)
    batch = indices.shape[0]
    row = np.arange(batch)
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    losses = lse - shifted[row, labels]

    d_logits = probs.copy()
    d_logits[row, labels] -= 1.0
    if class_weights is None:
        loss = float(losses.mean(dtype=np.float64))
        d_logits /= batch
    else:
        w = np.asarray(class_weights, dtype=np.float64)[labels]
        total = w.sum()
        loss = float((w * losses).sum(dtype=np.float64) / total)
        d_logits *= (w / total)[:, None]
    d_logits = d_logits.astype(dtype)

    d_w_out = d_logits.T @ h_drop
    d_b_out = d_logits.sum(axis=0)
    d_h = (d_logits @ params.dense.w) * fc_mult * lstm_mult

    grads = _lstm_backward_batch(params, cache, d_h)
    grads["w_out"] = d_w_out
    grads["b_out"] = d_b_out
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in {name}")
    return grads, loss


# --- Adam --------------------------------------------------------------------

@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(m={k: np.zeros_like(a) for k, a in params.arrays().items()},
                   v={k: np.zeros_like(a) for k, a in params.arrays().items()})


def adam_step(params: ModelParams, grads: dict[str, np.ndarray],
              state: AdamState, lr: float) -> tuple[ModelParams, AdamState]:
    """Bias-corrected Adam update, in place on the parameter arrays."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for name, p in params.arrays().items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != param {p.shape} "
                             f"for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        if not np.all(np.isfinite(update)):
            raise FloatingPointError(f"non-finite Adam update for {name}")
        p -= update.astype(p.dtype)
    params.embedding.weights[0] = 0.0  # pad row frozen
    return params, state


# --- prediction ---------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    label: Label
    probabilities: np.ndarray  # (C,), class order [negative, positive]
    low_confidence: bool = False


def predict_encoded(params: ModelParams, seq: EncodedSequence) -> Prediction:
    logits = forward_logits(params, seq.indices[None, :],
                            np.array([seq.true_length]))[0]
    probs = softmax(logits)
    if seq.true_length == 0:
        # nothing survived preprocessing: report Negative off the zero-state
        # pass and flag it
        return Prediction(Label.NEGATIVE, probs, low_confidence=True)
    label = Label(int(np.argmax(probs)))  # argmax ties resolve to Negative
    return Prediction(label, probs)


def predict(text: str, params: ModelParams, vocab: Vocabulary,
            preprocess_cfg, max_len: int | None = None) -> Prediction:
    from .preprocess import run_pipeline
    tokens = run_pipeline(text, preprocess_cfg)
    seq = encode(tokens, vocab, max_len or params.config.max_len)
    return predict_encoded(params, seq)


# --- checkpoints ---------------------------------------------------------------

_MAGIC = b"SENTCKPT"
_VERSION = 1
_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def _dtype_code(dtype) -> int:
    for code, dt in _DTYPE_CODES.items():
        if np.dtype(dtype) == dt:
            return code
    raise CheckpointError(f"unsupported checkpoint dtype {dtype}")


def _write_array(fh, arr: np.ndarray) -> None:
    raw = np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes()
    fh.write(struct.pack("<Q", len(raw)))
    fh.write(raw)


def _read_array(fh, shape, dtype) -> np.ndarray:
    header = fh.read(8)
    if len(header) != 8:
        raise CheckpointError("truncated checkpoint: missing array header")
    (nbytes,) = struct.unpack("<Q", header)
    expected = int(np.prod(shape)) * dtype.itemsize
    if nbytes != expected:
        raise CheckpointError(f"array payload {nbytes} bytes, expected {expected}")
    raw = fh.read(nbytes)
    if len(raw) != nbytes:
        raise CheckpointError("truncated checkpoint: short array payload")
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def save_checkpoint(path: str | Path, params: ModelParams,
                    adam: AdamState | None = None) -> None:
    cfg = params.config
    dtype = params.embedding.weights.dtype
    code = _dtype_code(dtype)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IB", _VERSION, code))
        fh.write(struct.pack("<5Q", cfg.vocab_size, cfg.embed_dim,
                             cfg.hidden_dim, cfg.num_classes, cfg.max_len))
        fh.write(struct.pack("<2d", cfg.lstm_dropout, cfg.fc_dropout))
        for arr in params.arrays().values():
            _write_array(fh, arr)
        if adam is None:
            fh.write(struct.pack("<B", 0))
        else:
            fh.write(struct.pack("<B", 1))
            fh.write(struct.pack("<Q", adam.t))
            for key in params.arrays():
                _write_array(fh, adam.m[key])
                _write_array(fh, adam.v[key])


def _expected_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    v, e = cfg.vocab_size, cfg.embed_dim
    h, c = cfg.hidden_dim, cfg.num_classes
    return {"embedding": (v, e), "w_ih": (4 * h, e), "w_hh": (4 * h, h),
            "b_ih": (4 * h,), "b_hh": (4 * h,), "w_out": (c, h), "b_out": (c,)}


def load_checkpoint(path: str | Path,
                    expect: ModelConfig | None = None,
                    ) -> tuple[ModelParams, AdamState | None]:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise CheckpointError(f"{path}: not a model checkpoint")
        header = fh.read(5)
        if len(header) != 5:
            raise CheckpointError("truncated checkpoint header")
        version, code = struct.unpack("<IB", header)
        if version != _VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        if code not in _DTYPE_CODES:
            raise CheckpointError(f"unknown dtype code {code}")
        dtype = _DTYPE_CODES[code]
        dims = struct.unpack("<5Q", fh.read(40))
        drops = struct.unpack("<2d", fh.read(16))
        cfg = ModelConfig(vocab_size=dims[0], embed_dim=dims[1],
                          hidden_dim=dims[2], num_classes=dims[3],
                          max_len=dims[4], lstm_dropout=drops[0],
                          fc_dropout=drops[1])
        if expect is not None:
            for attr in ("vocab_size", "embed_dim", "hidden_dim",
                         "num_classes", "max_len"):
                if getattr(expect, attr) != getattr(cfg, attr):
                    raise CheckpointError(
                        f"dimension mismatch: checkpoint {attr}="
                        f"{getattr(cfg, attr)}, expected {getattr(expect, attr)}")
        shapes = _expected_shapes(cfg)
        arrays = {name: _read_array(fh, shape, dtype)
                  for name, shape in shapes.items()}
        params = ModelParams(
            config=cfg,
            embedding=EmbeddingLayer(arrays["embedding"]),
            cell=LstmCell(arrays["w_ih"], arrays["w_hh"],
                          arrays["b_ih"], arrays["b_hh"]),
            dense=DenseLayer(arrays["w_out"], arrays["b_out"]),
        )
        flag = fh.read(1)
        if len(flag) != 1:
            raise CheckpointError("truncated checkpoint: missing Adam flag")
        adam = None
        if flag[0] == 1:
            (t,) = struct.unpack("<Q", fh.read(8))
            m, v = {}, {}
            for name, shape in shapes.items():
                m[name] = _read_array(fh, shape, dtype)
                v[name] = _read_array(fh, shape, dtype)
            adam = AdamState(m=m, v=v, t=t)
        return params, adam
