import numpy as np
import pytest

from betaood.errors import ConfigError, DataError
from betaood.model import (
    ArchConfig,
    TrainConfig,
    backward,
    batch_loss,
    checkpoint_from_json,
    checkpoint_to_json,
    forward,
    init_params,
    predict_batch,
    train,
)

ARCH = ArchConfig(input_dim=2, hidden=(4,), label_count=2)


def _flatten(params):
    arrays = list(params.hidden_weights) + list(params.hidden_biases)
    arrays += [params.w_pos, params.b_pos, params.w_neg, params.b_neg]
    return np.concatenate([a.ravel() for a in arrays])


def _tiny_dataset(rng, n=60, d=2, labels=2):
    x = rng.normal(size=(n, d)) + 3.0 * rng.integers(0, 2, size=(n, 1))
    y = np.zeros((n, labels), dtype=int)
    y[:, 0] = (x[:, 0] > 1.5).astype(int)
    y[:, 1] = 1 - y[:, 0]
    return x, y


class TestInitParams:
    def test_same_seed_bit_identical(self):
        p1 = _flatten(init_params(ARCH, 42))
        p2 = _flatten(init_params(ARCH, 42))
        np.testing.assert_array_equal(p1, p2)

    def test_different_seeds_differ(self):
        p1 = _flatten(init_params(ARCH, 1))
        p2 = _flatten(init_params(ARCH, 2))
        assert np.any(p1 != p2)

    def test_parameter_count(self):
        arch = ArchConfig(input_dim=2, hidden=(8,), label_count=3)
        assert _flatten(init_params(arch, 0)).size == 2 * 8 + 8 + 2 * (8 * 3 + 3)

    def test_biases_zero(self):
        params = init_params(ARCH, 5)
        for b in params.hidden_biases:
            assert np.all(b == 0.0)
        assert np.all(params.b_pos == 0.0)
        assert np.all(params.b_neg == 0.0)

    def test_zero_width_rejected(self):
        with pytest.raises(ConfigError):
            ArchConfig(input_dim=2, hidden=(0,), label_count=2)


class TestForward:
    def test_zero_params_zero_logits(self):
        params = init_params(ARCH, 0)
        for w in params.hidden_weights:
            w[:] = 0.0
        params.w_pos[:] = 0.0
        params.w_neg[:] = 0.0
        logits = forward(params, np.array([1.0, -2.0]))
        np.testing.assert_array_equal(logits.f_pos, [0.0, 0.0])
        np.testing.assert_array_equal(logits.f_neg, [0.0, 0.0])

    def test_hand_computed_single_layer(self):
        arch = ArchConfig(input_dim=2, hidden=(2,), label_count=2)
        params = init_params(arch, 0)
        params.hidden_weights[0][:] = np.eye(2)
        params.hidden_biases[0][:] = 0.0
        params.w_pos[:] = np.array([[1.0, 0.0], [0.0, 1.0]])
        params.b_pos[:] = np.array([0.5, -0.5])
        params.w_neg[:] = np.array([[2.0, 0.0], [0.0, 2.0]])
        params.b_neg[:] = 0.0
        logits = forward(params, np.array([1.0, 2.0]))
        # hidden = elu([1, 2]) = [1, 2]
        np.testing.assert_allclose(logits.f_pos, [1.5, 1.5])
        np.testing.assert_allclose(logits.f_neg, [2.0, 4.0])

    def test_batch_equals_per_sample(self):
        rng = np.random.default_rng(7)
        params = init_params(ARCH, 3)
        feats = rng.normal(size=(10, 2))
        logits_list, _, _ = predict_batch(params, feats)
        # no batch statistics; only BLAS summation order can differ
        for i in range(10):
            single = forward(params, feats[i])
            np.testing.assert_allclose(single.f_pos, logits_list[i].f_pos, rtol=0, atol=1e-13)
            np.testing.assert_allclose(single.f_neg, logits_list[i].f_neg, rtol=0, atol=1e-13)

    def test_dimension_mismatch_rejected(self):
        params = init_params(ARCH, 0)
        with pytest.raises(ConfigError):
            forward(params, np.array([1.0, 2.0, 3.0]))


class TestBackward:
    def test_finite_difference_all_parameters(self):
        rng = np.random.default_rng(11)
        h = 1e-5
        for _ in range(10):
            arch = ArchConfig(
                input_dim=int(rng.integers(1, 5)),
                hidden=(int(rng.integers(2, 5)),),
                label_count=int(rng.integers(1, 5)),
            )
            params = init_params(arch, int(rng.integers(0, 1000)))
            x = rng.normal(size=arch.input_dim)
            y = rng.integers(0, 2, arch.label_count)
            grads = backward(params, x, y)
            flat_grads = np.concatenate(
                [g.ravel() for g in grads["hidden_weights"]]
                + [g.ravel() for g in grads["hidden_biases"]]
                + [grads["w_pos"].ravel(), grads["b_pos"].ravel(),
                   grads["w_neg"].ravel(), grads["b_neg"].ravel()]
            )
            tensors = (
                list(params.hidden_weights)
                + list(params.hidden_biases)
                + [params.w_pos, params.b_pos, params.w_neg, params.b_neg]
            )
            xb = x[None, :]
            yb = np.array([y], dtype=float)
            fd = []
            for t in tensors:
                flat = t.ravel()
                for j in range(flat.size):
                    orig = flat[j]
                    flat[j] = orig + h
                    up = batch_loss(params, xb, yb)
                    flat[j] = orig - h
                    dn = batch_loss(params, xb, yb)
                    flat[j] = orig
                    fd.append((up - dn) / (2 * h))
            fd = np.array(fd)
            mask = np.abs(fd) > 1e-8
            rel = np.abs(flat_grads[mask] - fd[mask]) / np.abs(fd[mask])
            assert rel.max() <= 1e-4
            np.testing.assert_allclose(flat_grads[~mask], fd[~mask], atol=1e-7)

    def test_label_flip_swaps_head_gradients(self):
        rng = np.random.default_rng(13)
        arch = ArchConfig(input_dim=2, hidden=(3,), label_count=1)
        params = init_params(arch, 21)
        # symmetric heads so the alpha/beta swap shows up exactly
        params.w_neg[:] = params.w_pos
        params.b_neg[:] = params.b_pos
        x = rng.normal(size=2)
        g1 = backward(params, x, np.array([1]))
        g0 = backward(params, x, np.array([0]))
        np.testing.assert_array_equal(g1["w_pos"], g0["w_neg"])
        np.testing.assert_array_equal(g1["w_neg"], g0["w_pos"])

    def test_stationary_point_on_slice(self):
        # shared backbone weight with opposing head pulls: raising the hidden
        # activation grows alpha (good for y=1) but grows beta twice as fast,
        # so the loss has an interior minimum along this slice
        arch = ArchConfig(input_dim=1, hidden=(1,), label_count=1)
        params = init_params(arch, 3)
        params.w_pos[0, 0] = 1.0
        params.b_pos[0] = 0.0
        params.w_neg[0, 0] = 2.0
        params.b_neg[0] = 0.0
        x = np.array([1.0])
        y = np.array([1])

        def grad_at(v):
            params.hidden_weights[0][0, 0] = v
            return backward(params, x, y)["hidden_weights"][0][0, 0]

        lo, hi = -5.0, 5.0
        assert grad_at(lo) < 0 < grad_at(hi) or grad_at(lo) > 0 > grad_at(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if grad_at(lo) * grad_at(mid) <= 0:
                hi = mid
            else:
                lo = mid
        assert abs(grad_at(0.5 * (lo + hi))) < 1e-10


class TestTrain:
    def test_same_seed_bit_identical_checkpoint(self):
        rng = np.random.default_rng(17)
        x, y = _tiny_dataset(rng)
        cfg = TrainConfig(epochs=3, batch_size=16, seed=9)
        c1 = train(x, y, ARCH, cfg)
        c2 = train(x, y, ARCH, cfg)
        assert checkpoint_to_json(c1) == checkpoint_to_json(c2)

    def test_loss_descends_on_separable_data(self):
        rng = np.random.default_rng(19)
        x, y = _tiny_dataset(rng, n=200)
        cfg = TrainConfig(
            learning_rate_backbone=0.05, learning_rate_head=0.5,
            epochs=30, batch_size=32, seed=1,
        )
        ckpt = train(x, y, ARCH, cfg)
        assert ckpt.loss_trace[-1] < 0.5 * ckpt.loss_trace[0]

    def test_zero_learning_rate_freezes_params(self):
        rng = np.random.default_rng(23)
        x, y = _tiny_dataset(rng)
        cfg = TrainConfig(
            learning_rate_backbone=0.0, learning_rate_head=0.0, epochs=3,
            batch_size=16, seed=4,
        )
        ckpt = train(x, y, ARCH, cfg)
        np.testing.assert_array_equal(
            _flatten(ckpt.params), _flatten(init_params(ARCH, 4))
        )
        assert len(set(ckpt.loss_trace)) == 1

    def test_empty_dataset_rejected(self):
        with pytest.raises(DataError):
            train(np.zeros((0, 2)), np.zeros((0, 2)), ARCH, TrainConfig())

    def test_zero_epochs_rejected(self):
        with pytest.raises(ConfigError):
            TrainConfig(epochs=0)


class TestPredictBatch:
    def test_empty_input(self):
        params = init_params(ARCH, 0)
        logits, evs, preds = predict_batch(params, [])
        assert logits == [] and evs == [] and preds == []

    def test_alignment_and_consistency(self):
        rng = np.random.default_rng(29)
        params = init_params(ARCH, 31)
        feats = rng.normal(size=(5, 2))
        logits, evs, preds = predict_batch(params, feats)
        assert len(logits) == len(evs) == len(preds) == 5
        for lg, ev, pred in zip(logits, evs, preds):
            np.testing.assert_allclose(ev.alpha / (ev.alpha + ev.beta), pred.p)
            assert np.all(ev.alpha > 1.0) and np.all(ev.beta > 1.0)


class TestCheckpointSerialization:
    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(37)
        x, y = _tiny_dataset(rng)
        ckpt = train(x, y, ARCH, TrainConfig(epochs=2, batch_size=16, seed=8))
        text = checkpoint_to_json(ckpt)
        restored = checkpoint_from_json(text)
        assert checkpoint_to_json(restored) == text

    def test_version_mismatch_rejected(self):
        rng = np.random.default_rng(41)
        x, y = _tiny_dataset(rng)
        ckpt = train(x, y, ARCH, TrainConfig(epochs=1, batch_size=16, seed=8))
        text = checkpoint_to_json(ckpt).replace('"format_version":1', '"format_version":99')
        with pytest.raises(DataError):
            checkpoint_from_json(text)

    def test_malformed_json_rejected(self):
        with pytest.raises(DataError):
            checkpoint_from_json("{not json")
