import numpy as np
import pytest

from protcascade.neuralnet import (
    MlpConfig,
    MlpError,
    cross_entropy,
    forward,
    gradient_check,
    init_mlp,
    restrict,
    softmax,
    train_backprop,
)
from protcascade.rng import XorShift64Star


def zero_net(sizes):
    m = init_mlp(MlpConfig(sizes))
    for w in m.weights:
        w[:] = 0
    return m


class TestRng:
    def test_reference_sequence(self):
        # xorshift64* step computed by hand-written big-int arithmetic
        x = 1
        x ^= x >> 12
        x ^= (x << 25) % 2**64
        x ^= x >> 27
        assert XorShift64Star(1).next_u64() == (x * 0x2545F4914F6CDD1D) % 2**64

    def test_unit_interval(self):
        rng = XorShift64Star(5)
        vals = [rng.random() for _ in range(1000)]
        assert 0 <= min(vals) and max(vals) < 1

    def test_zero_seed_not_stuck(self):
        rng = XorShift64Star(0)
        assert len({rng.next_u64() for _ in range(10)}) == 10


class TestInit:
    def test_deterministic(self):
        a = init_mlp(MlpConfig((7, 5, 3), seed=11))
        b = init_mlp(MlpConfig((7, 5, 3), seed=11))
        for wa, wb in zip(a.weights, b.weights):
            assert wa.tobytes() == wb.tobytes()

    def test_seed_matters(self):
        a = init_mlp(MlpConfig((7, 5, 3), seed=1))
        b = init_mlp(MlpConfig((7, 5, 3), seed=2))
        assert not np.array_equal(a.weights[0], b.weights[0])

    def test_biases_zero_and_range(self):
        m = init_mlp(MlpConfig((9, 4, 2), seed=3))
        assert all(np.all(b == 0) for b in m.biases)
        for w, fan_in in zip(m.weights, (9, 4)):
            assert np.all(np.abs(w) <= 1 / np.sqrt(fan_in))

    def test_zero_size_layer(self):
        with pytest.raises(MlpError):
            MlpConfig((4, 0, 2))

    def test_needs_hidden_layer(self):
        with pytest.raises(MlpError):
            MlpConfig((4, 2))


class TestForward:
    def test_zero_net_uniform(self):
        np.testing.assert_allclose(forward(zero_net((4, 3, 5)), np.zeros(4)), 0.2)

    def test_simplex(self):
        rng = np.random.default_rng(0)
        m = init_mlp(MlpConfig((6, 8, 4), seed=9))
        for _ in range(50):
            p = forward(m, rng.normal(size=6) * 10)
            assert np.all(p >= 0) and abs(p.sum() - 1) <= 1e-12

    def test_shift_invariance(self):
        logits = np.random.default_rng(1).normal(size=6)
        np.testing.assert_allclose(softmax(logits + 123.4), softmax(logits), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(MlpError):
            forward(init_mlp(MlpConfig((3, 2, 2))), np.zeros(4))


class TestTraining:
    def test_monotone_loss_small_lr(self):
        rng = np.random.default_rng(2)
        data = [(rng.normal(size=3), c) for c in (0, 1, 0, 1)]
        m = train_backprop(init_mlp(MlpConfig((3, 5, 2), learning_rate=1e-3, epochs=200, seed=4)), data)
        assert np.all(np.diff(m.loss_history) <= 0)

    def test_single_sample_converges(self):
        x = np.array([0.5, -0.2, 0.1])
        m = train_backprop(init_mlp(MlpConfig((3, 4, 3), learning_rate=1.0, epochs=2000, seed=5)), [(x, 2)])
        assert forward(m, x)[2] > 0.99

    def test_zero_epochs_no_op(self):
        m = init_mlp(MlpConfig((3, 4, 2), epochs=0, seed=6))
        out = train_backprop(m, [(np.ones(3), 1)])
        for a, b in zip(m.weights, out.weights):
            assert np.array_equal(a, b)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        data = [(rng.normal(size=4), int(c)) for c in rng.integers(0, 3, size=12)]
        cfg = MlpConfig((4, 6, 3), epochs=50, seed=8)
        a = train_backprop(init_mlp(cfg), data)
        b = train_backprop(init_mlp(cfg), data)
        assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))

    def test_empty_and_bad_class(self):
        m = init_mlp(MlpConfig((2, 2, 2)))
        with pytest.raises(MlpError):
            train_backprop(m, [])
        with pytest.raises(MlpError):
            train_backprop(m, [(np.zeros(2), 2)])


class TestGradientCheck:
    def test_fresh_net(self):
        rng = np.random.default_rng(4)
        m = init_mlp(MlpConfig((10, 8, 3), seed=21))
        assert gradient_check(m, rng.normal(size=10), 1) < 1e-4

    @pytest.mark.parametrize("target", [0, 1, 2])
    def test_every_class(self, target):
        rng = np.random.default_rng(5)
        m = init_mlp(MlpConfig((10, 8, 3), seed=22))
        assert gradient_check(m, rng.normal(size=10), target) < 1e-4

    def test_zero_net_absolute(self):
        from protcascade.neuralnet import gradients

        m = zero_net((5, 4, 3))
        x = np.random.default_rng(6).normal(size=5)
        gw, gb = gradients(m, x, 0)
        h = 1e-5
        for params, grads in zip(m.weights + m.biases, gw + gb):
            flat, g = params.reshape(-1), grads.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = cross_entropy(m, x, 0)
                flat[j] = orig - h
                down = cross_entropy(m, x, 0)
                flat[j] = orig
                assert abs(g[j] - (up - down) / (2 * h)) < 1e-6

    def test_deeper_net(self):
        rng = np.random.default_rng(7)
        m = init_mlp(MlpConfig((6, 5, 4, 3), seed=23))
        assert gradient_check(m, rng.normal(size=6), 2) < 1e-4


class TestRestrict:
    def test_preserves_argmax(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            p = softmax(rng.normal(size=6))
            idx = sorted(rng.choice(6, size=int(rng.integers(1, 7)), replace=False))
            sub = restrict(p, idx)
            assert sub.sum() == pytest.approx(1.0)
            assert idx[int(np.argmax(sub))] == idx[int(np.argmax(p[idx]))]
