import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentimen import nn
from sentimen.ingest import Label
from sentimen.vocab import EncodedSequence


def tiny_config(V=6, E=3, H=4, C=2, T=5, fc_dropout=0.0, **kw):
    return nn.ModelConfig(vocab_size=V, embed_dim=E, hidden_dim=H,
                          num_classes=C, max_len=T, fc_dropout=fc_dropout, **kw)


def random_params(cfg, seed=0, bias_scale=0.3):
    params = nn.init_params(cfg, seed=seed)
    rng = np.random.default_rng(seed + 1000)
    params.cell.b_ih[:] = rng.normal(0, bias_scale, params.cell.b_ih.shape)
    params.cell.b_hh[:] = rng.normal(0, bias_scale, params.cell.b_hh.shape)
    params.dense.b[:] = rng.normal(0, bias_scale, params.dense.b.shape)
    return params


def random_batch(cfg, rng, batch=3):
    T = cfg.max_len
    idx = rng.integers(1, cfg.vocab_size, size=(batch, T))
    lengths = rng.integers(1, T + 1, size=batch)
    for b in range(batch):
        idx[b, lengths[b]:] = 0
    labels = rng.integers(0, cfg.num_classes, size=batch)
    return idx, lengths, labels


class TestCountParameters:
    def test_full_scale_architecture(self):
        assert nn.count_parameters(16378, 128, 128, 2) == 2_228_738

    def test_unit_dims_hand_enumerated(self):
        # 1*1 emb + 4*(1+1+2) gates + (1*1+1) head = 1 + 16 + 2
        assert nn.count_parameters(1, 1, 1, 1) == 19

    def test_small_dims_hand_enumerated(self):
        # 40 emb + 4*(12+9+6) + (6+2)
        assert nn.count_parameters(10, 4, 3, 2) == 156

    @given(V=st.integers(1, 40), E=st.integers(1, 8), H=st.integers(1, 8),
           C=st.integers(1, 4))
    @settings(max_examples=50, deadline=None)
    def test_matches_direct_array_enumeration(self, V, E, H, C):
        cfg = nn.ModelConfig(vocab_size=V, embed_dim=E, hidden_dim=H,
                             num_classes=C, max_len=3)
        params = nn.init_params(cfg)
        assert params.n_parameters() == nn.count_parameters(V, E, H, C)

    def test_rejects_zero_dims(self):
        with pytest.raises(ValueError):
            nn.count_parameters(0, 1, 1, 1)


class TestSoftmax:
    def test_symmetry(self):
        assert np.allclose(nn.softmax(np.array([0.0, 0.0])), [0.5, 0.5])

    def test_analytic_two_thirds(self):
        out = nn.softmax(np.array([math.log(2), 0.0]))
        assert np.allclose(out, [2 / 3, 1 / 3], atol=1e-12)

    def test_overflow_safety(self):
        out = nn.softmax(np.array([1000.0, 0.0]))
        assert np.all(np.isfinite(out))
        assert out[0] == pytest.approx(1.0)
        assert out[1] == pytest.approx(0.0, abs=1e-300)

    @given(st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=6))
    @settings(max_examples=80)
    def test_sums_to_one(self, logits):
        out = nn.softmax(np.array(logits))
        assert abs(out.sum() - 1.0) <= 1e-12
        # extreme spreads underflow to exactly 0, which is fine
        assert np.all(np.isfinite(out))
        assert np.all(out >= 0) and np.all(out <= 1 + 1e-15)

    def test_moderate_logits_strictly_inside_unit_interval(self):
        out = nn.softmax(np.array([-30.0, 0.0, 30.0]))
        assert np.all(out > 0) and np.all(out < 1)


class TestCrossEntropy:
    def test_confident_correct(self):
        loss, _ = nn.cross_entropy(np.array([1000.0, 0.0]), 0)
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_uniform_equals_ln2(self):
        for label in (0, 1):
            loss, _ = nn.cross_entropy(np.array([0.0, 0.0]), label)
            assert loss == pytest.approx(math.log(2), abs=1e-12)

    def test_uniform_logits_give_ln_num_classes(self):
        for n_classes in (2, 3, 5):
            loss, _ = nn.cross_entropy(np.full(n_classes, 1.7), 0)
            assert loss == pytest.approx(math.log(n_classes), abs=1e-12)

    def test_hand_evaluated(self):
        loss, _ = nn.cross_entropy(np.array([1.0, -1.0]), 1)
        assert loss == pytest.approx(math.log(1 + math.e ** 2), rel=1e-12)

    def test_gradient_is_softmax_minus_onehot(self):
        logits = np.array([0.3, -0.7, 1.1])
        _, grad = nn.cross_entropy(logits, 2)
        expected = nn.softmax(logits)
        expected[2] -= 1.0
        assert np.allclose(grad, expected, atol=1e-12)

    def test_gradient_matches_finite_differences(self):
        logits = np.array([0.25, -1.5])
        _, grad = nn.cross_entropy(logits, 0)
        eps = 1e-6
        for j in range(2):
            bumped = logits.copy()
            bumped[j] += eps
            up, _ = nn.cross_entropy(bumped, 0)
            bumped[j] -= 2 * eps
            down, _ = nn.cross_entropy(bumped, 0)
            assert grad[j] == pytest.approx((up - down) / (2 * eps), abs=1e-8)

    def test_invalid_label(self):
        with pytest.raises(ValueError):
            nn.cross_entropy(np.array([0.0, 0.0]), 2)

    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=5),
           st.data())
    @settings(max_examples=60)
    def test_nonnegative(self, logits, data):
        label = data.draw(st.integers(0, len(logits) - 1))
        loss, _ = nn.cross_entropy(np.array(logits), label)
        assert loss >= 0


def scalar_lstm_step(x, h, c, cell):
    """Independent per-element re-implementation of the gate equations."""
    H = len(h)
    E = len(x)
    h_new = [0.0] * H
    c_new = [0.0] * H
    for k in range(H):
        def pre(block):
            row = block * H + k
            acc = cell.b_ih[row] + cell.b_hh[row]
            for j in range(E):
                acc += cell.w_ih[row, j] * x[j]
            for j in range(H):
                acc += cell.w_hh[row, j] * h[j]
            return acc

        i = 1 / (1 + math.exp(-pre(0)))
        f = 1 / (1 + math.exp(-pre(1)))
        g = math.tanh(pre(2))
        o = 1 / (1 + math.exp(-pre(3)))
        c_new[k] = f * c[k] + i * g
        h_new[k] = o * math.tanh(c_new[k])
    return h_new, c_new


class TestLstmStep:
    def test_all_zero_weights_analytic(self):
        cell = nn.LstmCell(np.zeros((8, 3)), np.zeros((8, 2)),
                           np.zeros(8), np.zeros(8))
        state = nn.LstmState(np.zeros(2), np.zeros(2))
        out = nn.lstm_step(np.array([1.0, -2.0, 0.5]), state, cell)
        assert np.allclose(out.c, 0.0) and np.allclose(out.h, 0.0)

    def test_scalar_saturated_gates(self):
        # E = H = 1, zero weights, biases drive i, g, o to saturation
        b = np.array([100.0, 0.0, 100.0, 100.0])  # [i, f, g, o]
        cell = nn.LstmCell(np.zeros((4, 1)), np.zeros((4, 1)), b, np.zeros(4))
        out = nn.lstm_step(np.array([0.0]),
                           nn.LstmState(np.zeros(1), np.zeros(1)), cell)
        assert out.c[0] == pytest.approx(1.0, abs=1e-12)
        assert out.h[0] == pytest.approx(0.7616, abs=5e-5)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(11)
        H, E = 2, 2
        cell = nn.LstmCell(rng.normal(0, 0.7, (4 * H, E)),
                           rng.normal(0, 0.7, (4 * H, H)),
                           rng.normal(0, 0.7, 4 * H),
                           rng.normal(0, 0.7, 4 * H))
        x = rng.normal(0, 1, E)
        state = nn.LstmState(rng.normal(0, 1, H), rng.normal(0, 1, H))
        out = nn.lstm_step(x, state, cell)
        h_ref, c_ref = scalar_lstm_step(x, state.h, state.c, cell)
        assert np.allclose(out.h, h_ref, atol=1e-12)
        assert np.allclose(out.c, c_ref, atol=1e-12)

    def test_shape_mismatch(self):
        cell = nn.LstmCell(np.zeros((8, 3)), np.zeros((8, 2)),
                           np.zeros(8), np.zeros(8))
        with pytest.raises(ValueError):
            nn.lstm_step(np.zeros(4), nn.LstmState(np.zeros(2), np.zeros(2)),
                         cell)


class TestLstmForward:
    def test_zero_length_convention(self):
        cell = nn.LstmCell(np.ones((8, 3)), np.ones((8, 2)),
                           np.ones(8), np.ones(8))
        out = nn.lstm_forward(np.ones((4, 3)), 0, cell)
        assert np.all(out.h == 0) and np.all(out.c == 0)

    def test_length_one_is_single_step(self):
        rng = np.random.default_rng(3)
        cell = nn.LstmCell(rng.normal(size=(8, 3)), rng.normal(size=(8, 2)),
                           rng.normal(size=8), rng.normal(size=8))
        vectors = rng.normal(size=(4, 3))
        fwd = nn.lstm_forward(vectors, 1, cell)
        step = nn.lstm_step(vectors[0],
                            nn.LstmState(np.zeros(2), np.zeros(2)), cell)
        assert np.array_equal(fwd.h, step.h) and np.array_equal(fwd.c, step.c)

    def test_padding_ignored(self):
        rng = np.random.default_rng(4)
        cell = nn.LstmCell(rng.normal(size=(8, 3)), rng.normal(size=(8, 2)),
                           rng.normal(size=8), rng.normal(size=8))
        real = rng.normal(size=(3, 3))
        padded = np.concatenate([real, np.zeros((2, 3))])
        a = nn.lstm_forward(padded, 3, cell)
        b = nn.lstm_forward(real, 3, cell)
        assert np.array_equal(a.h, b.h) and np.array_equal(a.c, b.c)

    def test_true_length_too_long(self):
        cell = nn.LstmCell(np.zeros((8, 3)), np.zeros((8, 2)),
                           np.zeros(8), np.zeros(8))
        with pytest.raises(ValueError):
            nn.lstm_forward(np.zeros((2, 3)), 3, cell)


class TestEmbedForward:
    weights = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 3.0]])

    def test_pad_row_is_zero(self):
        emb = nn.EmbeddingLayer(self.weights)
        out = nn.embed_forward(EncodedSequence(np.array([0]), 0), emb)
        assert np.array_equal(out, [[0.0, 0.0]])

    def test_row_lookup(self):
        emb = nn.EmbeddingLayer(self.weights)
        out = nn.embed_forward(EncodedSequence(np.array([2, 1]), 2), emb)
        assert np.array_equal(out, [[2.0, 3.0], [1.0, 1.0]])

    def test_pad_tail(self):
        emb = nn.EmbeddingLayer(self.weights)
        out = nn.embed_forward(EncodedSequence(np.array([2, 0, 0]), 1), emb)
        assert np.array_equal(out, [[2.0, 3.0], [0.0, 0.0], [0.0, 0.0]])

    def test_out_of_range(self):
        emb = nn.EmbeddingLayer(self.weights)
        with pytest.raises(IndexError):
            nn.embed_forward(EncodedSequence(np.array([5]), 1), emb)


class TestDenseForward:
    def test_bias_only(self):
        dense = nn.DenseLayer(np.zeros((2, 3)), np.array([1.0, 2.0]))
        assert np.array_equal(nn.dense_forward(np.ones(3), dense), [1.0, 2.0])

    def test_identity_weights(self):
        dense = nn.DenseLayer(np.eye(2), np.zeros(2))
        assert np.array_equal(nn.dense_forward(np.array([3.0, 4.0]), dense),
                              [3.0, 4.0])

    def test_scalar_dot_oracle(self):
        rng = np.random.default_rng(9)
        w, b = rng.normal(size=(2, 4)), rng.normal(size=2)
        h = rng.normal(size=4)
        logits = nn.dense_forward(h, nn.DenseLayer(w, b))
        for k in range(2):
            ref = b[k] + sum(w[k, j] * h[j] for j in range(4))
            assert logits[k] == pytest.approx(ref, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            nn.dense_forward(np.zeros(3), nn.DenseLayer(np.zeros((2, 4)),
                                                        np.zeros(2)))


class TestDropout:
    def test_inference_identity(self):
        x = np.arange(5.0)
        assert nn.dropout(x, 0.5, training=False) is x

    def test_rate_zero_identity(self):
        x = np.arange(5.0)
        assert np.array_equal(nn.dropout(x, 0.0, training=True), x)

    def test_statistical_mean_preserved(self):
        rng = np.random.default_rng(123)
        out = nn.dropout(np.ones(10_000), 0.5, training=True, rng=rng)
        assert out.mean() == pytest.approx(1.0, abs=0.05)
        kept = out[out != 0]
        assert np.allclose(kept, 2.0)  # survivors scaled by 1/(1-rate)

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            nn.dropout(np.ones(3), 1.0, training=True,
                       rng=np.random.default_rng(0))


class TestBackward:
    def test_gradcheck_small_models(self):
        rng = np.random.default_rng(1)
        for trial in range(3):
            cfg = tiny_config(V=int(rng.integers(2, 9)),
                              E=int(rng.integers(1, 5)),
                              H=int(rng.integers(1, 5)),
                              T=int(rng.integers(1, 6)))
            params = random_params(cfg, seed=trial)
            idx, lengths, labels = random_batch(cfg, rng, batch=2)
            grads, _ = nn.backward(params, idx, lengths, labels,
                                   training=False)
            assert gradcheck_max_rel_error(params, grads, idx, lengths,
                                           labels) < 1e-4

    def test_zero_weight_model_analytic(self):
        cfg = tiny_config(V=4, E=2, H=2, T=3)
        params = nn.init_params(cfg)
        for arr in params.arrays().values():
            arr[:] = 0.0
        idx = np.array([[1, 2, 0]])
        grads, loss = nn.backward(params, idx, np.array([2]), np.array([0]),
                                  training=False)
        assert loss == pytest.approx(math.log(2), abs=1e-12)
        assert np.allclose(grads["b_out"], [-0.5, 0.5], atol=1e-12)
        for name in ("embedding", "w_ih", "w_hh", "b_ih", "b_hh", "w_out"):
            assert np.allclose(grads[name], 0.0, atol=1e-12), name

    def test_duplicated_example_leaves_mean_gradient(self):
        cfg = tiny_config()
        params = random_params(cfg, seed=5)
        rng = np.random.default_rng(8)
        idx, lengths, labels = random_batch(cfg, rng, batch=1)
        single, loss1 = nn.backward(params, idx, lengths, labels,
                                    training=False)
        doubled, loss2 = nn.backward(params, np.repeat(idx, 2, axis=0),
                                     np.repeat(lengths, 2),
                                     np.repeat(labels, 2), training=False)
        assert loss2 == pytest.approx(loss1, rel=1e-12)
        for name in single:
            assert np.allclose(single[name], doubled[name], atol=1e-12)

    def test_pad_embedding_row_gets_zero_gradient(self):
        cfg = tiny_config()
        params = random_params(cfg, seed=2)
        idx = np.array([[1, 2, 3, 0, 0]])
        grads, _ = nn.backward(params, idx, np.array([3]), np.array([1]),
                               training=False)
        assert np.all(grads["embedding"][0] == 0.0)

    def test_empty_batch_rejected(self):
        cfg = tiny_config()
        params = nn.init_params(cfg)
        with pytest.raises(ValueError):
            nn.backward(params, np.zeros((0, 5), dtype=int), np.zeros(0, int),
                        np.zeros(0, int))


def gradcheck_max_rel_error(params, grads, idx, lengths, labels, eps=1e-5):
    worst = 0.0
    for name, p in params.arrays().items():
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            k = it.multi_index
            original = p[k]
            p[k] = original + eps
            _, up = nn.backward(params, idx, lengths, labels, training=False)
            p[k] = original - eps
            _, down = nn.backward(params, idx, lengths, labels, training=False)
            p[k] = original
            fd = (up - down) / (2 * eps)
            analytic = grads[name][k]
            if name == "embedding" and k[0] == 0:
                assert analytic == 0.0
                continue
            # 1e-6 floor: FD roundoff dominates below it
            denom = max(abs(fd), abs(analytic), 1e-6)
            worst = max(worst, abs(fd - analytic) / denom)
    return worst


class TestMaskingEquivalence:
    def test_forward_and_backward_exact(self):
        rng = np.random.default_rng(17)
        for trial in range(10):
            cfg = tiny_config(T=int(rng.integers(2, 7)))
            params = random_params(cfg, seed=trial + 20)
            length = int(rng.integers(1, cfg.max_len))
            real = rng.integers(1, cfg.vocab_size, size=(1, length))
            label = np.array([int(rng.integers(0, 2))])
            padded = np.zeros((1, cfg.max_len), dtype=np.int64)
            padded[0, :length] = real
            lengths = np.array([length])

            assert np.array_equal(
                nn.forward_logits(params, real, lengths),
                nn.forward_logits(params, padded, lengths))
            g_real, l_real = nn.backward(params, real, lengths, label,
                                         training=False)
            g_pad, l_pad = nn.backward(params, padded, lengths, label,
                                       training=False)
            assert l_real == l_pad
            for name in g_real:
                if name == "embedding":
                    # padded run has extra (all-zero) pad-row slots
                    assert np.max(np.abs(g_real[name] - g_pad[name])) < 1e-12
                else:
                    assert np.array_equal(g_real[name], g_pad[name])


class TestAdam:
    def test_zero_gradient_leaves_params(self):
        cfg = tiny_config()
        params = nn.init_params(cfg, seed=1)
        before = {k: a.copy() for k, a in params.arrays().items()}
        zero = {k: np.zeros_like(a) for k, a in params.arrays().items()}
        state = nn.AdamState.for_params(params)
        nn.adam_step(params, zero, state, lr=0.1)
        for name, arr in params.arrays().items():
            assert np.array_equal(arr, before[name])

    def test_first_step_hand_value(self):
        cfg = nn.ModelConfig(vocab_size=1, embed_dim=1, hidden_dim=1,
                             num_classes=1, max_len=1)
        params = nn.init_params(cfg)
        params.dense.b[:] = 1.0
        grads = {k: np.zeros_like(a) for k, a in params.arrays().items()}
        grads["b_out"] = np.array([1.0])
        state = nn.AdamState.for_params(params)
        nn.adam_step(params, grads, state, lr=0.1)
        # m-hat = v-hat = 1 on the first step: p = 1 - 0.1/(1 + 1e-8)
        assert params.dense.b[0] == pytest.approx(0.9, abs=1e-8)

    def test_two_steps_match_scalar_recurrence(self):
        cfg = nn.ModelConfig(vocab_size=1, embed_dim=1, hidden_dim=1,
                             num_classes=1, max_len=1)
        params = nn.init_params(cfg)
        params.dense.b[:] = 1.0
        grads = {k: np.zeros_like(a) for k, a in params.arrays().items()}
        grads["b_out"] = np.array([1.0])
        state = nn.AdamState.for_params(params)
        nn.adam_step(params, grads, state, lr=0.1)
        nn.adam_step(params, grads, state, lr=0.1)

        p, m, v = 1.0, 0.0, 0.0
        for t in (1, 2):
            m = 0.9 * m + 0.1 * 1.0
            v = 0.999 * v + 0.001 * 1.0
            p -= 0.1 * (m / (1 - 0.9 ** t)) / (math.sqrt(v / (1 - 0.999 ** t))
                                               + 1e-8)
        assert params.dense.b[0] == pytest.approx(p, rel=1e-12)
        assert state.t == 2

    def test_shape_mismatch_rejected(self):
        cfg = tiny_config()
        params = nn.init_params(cfg)
        grads = {k: np.zeros_like(a) for k, a in params.arrays().items()}
        grads["b_out"] = np.zeros(7)
        with pytest.raises(ValueError):
            nn.adam_step(params, grads, nn.AdamState.for_params(params), 0.1)


class TestInferenceDeterminism:
    def test_repeated_calls_identical(self):
        cfg = tiny_config(fc_dropout=0.5)
        params = random_params(cfg, seed=9)
        rng = np.random.default_rng(2)
        idx, lengths, _ = random_batch(cfg, rng)
        a = nn.forward_logits(params, idx, lengths)
        b = nn.forward_logits(params, idx, lengths)
        assert np.array_equal(a, b)


class TestPredict:
    def test_bias_dominated_negative(self):
        cfg = tiny_config(V=4, E=2, H=2, T=3)
        params = nn.init_params(cfg)
        for arr in params.arrays().values():
            arr[:] = 0.0
        params.dense.b[:] = [5.0, -5.0]
        pred = nn.predict_encoded(params, EncodedSequence(np.array([1, 2, 0]), 2))
        assert pred.label == Label.NEGATIVE
        assert pred.probabilities[0] == pytest.approx(0.99995, abs=1e-5)
        assert not pred.low_confidence

    def test_tie_goes_negative(self):
        cfg = tiny_config(V=4, E=2, H=2, T=2)
        params = nn.init_params(cfg)
        for arr in params.arrays().values():
            arr[:] = 0.0
        pred = nn.predict_encoded(params, EncodedSequence(np.array([1, 0]), 1))
        assert np.allclose(pred.probabilities, [0.5, 0.5])
        assert pred.label == Label.NEGATIVE

    def test_empty_sequence_low_confidence(self):
        cfg = tiny_config(V=4, E=2, H=2, T=2)
        params = nn.init_params(cfg)
        pred = nn.predict_encoded(params, EncodedSequence(np.array([0, 0]), 0))
        assert pred.label == Label.NEGATIVE
        assert pred.low_confidence


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        cfg = tiny_config()
        params = random_params(cfg, seed=4)
        state = nn.AdamState.for_params(params)
        state.t = 7
        state.m["w_ih"][:] = 0.25
        nn.save_checkpoint(tmp_path / "m.bin", params, state)
        loaded, adam = nn.load_checkpoint(tmp_path / "m.bin")
        for name, arr in params.arrays().items():
            assert np.array_equal(arr, loaded.arrays()[name])
            assert arr.dtype == loaded.arrays()[name].dtype
        assert adam.t == 7
        assert np.array_equal(adam.m["w_ih"], state.m["w_ih"])
        assert loaded.config == cfg

    def test_dimension_mismatch(self, tmp_path):
        params = nn.init_params(tiny_config(H=4))
        nn.save_checkpoint(tmp_path / "m.bin", params)
        with pytest.raises(nn.CheckpointError, match="hidden_dim"):
            nn.load_checkpoint(tmp_path / "m.bin", expect=tiny_config(H=8))

    def test_truncated_file(self, tmp_path):
        params = nn.init_params(tiny_config())
        nn.save_checkpoint(tmp_path / "m.bin", params)
        blob = (tmp_path / "m.bin").read_bytes()
        (tmp_path / "t.bin").write_bytes(blob[:len(blob) // 2])
        with pytest.raises(nn.CheckpointError):
            nn.load_checkpoint(tmp_path / "t.bin")

    def test_wrong_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"NOTAMODELFILE")
        with pytest.raises(nn.CheckpointError, match="not a model checkpoint"):
            nn.load_checkpoint(tmp_path / "x.bin")

    def test_float32_round_trip(self, tmp_path):
        params = nn.init_params(tiny_config(), dtype=np.float32)
        nn.save_checkpoint(tmp_path / "m.bin", params)
        loaded, _ = nn.load_checkpoint(tmp_path / "m.bin")
        assert loaded.embedding.weights.dtype == np.dtype("<f4")
        assert np.array_equal(loaded.embedding.weights,
                              params.embedding.weights)
