"""Tests for the feedforward network core."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from see_rl.errors import ConfigurationError, DivergenceError
from see_rl.nets import (
    AdamState,
    MlpSpec,
    adam_step,
    clip_gradients,
    dueling_combine,
    dueling_combine_backward,
    init_params,
    mlp_backward,
    mlp_forward,
    polyak_update,
)


def finite_difference_grad(fn, params, h=1e-5):
    """Central-difference gradient of a scalar function of a flat vector."""
    grad = np.zeros_like(params)
    for i in range(params.size):
        up = params.copy()
        up[i] += h
        down = params.copy()
        down[i] -= h
        grad[i] = (fn(up) - fn(down)) / (2.0 * h)
    return grad


def assert_grads_close(analytic, numeric, rel_tol=1e-4, abs_floor=1e-8):
    """Relative comparison, skipping components with negligible true derivative."""
    mask = np.abs(numeric) >= abs_floor
    denom = np.maximum(np.abs(numeric[mask]), abs_floor)
    rel = np.abs(analytic[mask] - numeric[mask]) / denom
    assert rel.size == 0 or rel.max() < rel_tol, f"max relative error {rel.max():.3e}"


class TestForward:
    def test_zero_params_give_zero_output(self):
        spec = MlpSpec(3, (4,), 2)
        out, _ = mlp_forward(spec, np.zeros(spec.param_count), np.ones(3))
        assert np.all(out == 0.0)

    def test_identity_linear_layer(self):
        spec = MlpSpec(3, (), 3)
        params = np.concatenate([np.eye(3).ravel(), np.zeros(3)])
        x = np.array([0.5, -1.0, 2.0])
        out, _ = mlp_forward(spec, params, x)
        np.testing.assert_allclose(out, x)

    def test_1_1_1_relu_net(self):
        # w1=1, b1=-2, w2=3, b2=0, input 1 -> relu(1 - 2) * 3 = 0
        spec = MlpSpec(1, (1,), 1)
        params = np.array([1.0, -2.0, 3.0, 0.0])
        out, _ = mlp_forward(spec, params, np.array([1.0]))
        assert out[0] == 0.0

    def test_batched_matches_single(self):
        rng = np.random.default_rng(0)
        spec = MlpSpec(4, (8,), 3)
        params = init_params(spec, rng, np.float64)
        xs = rng.normal(size=(5, 4))
        batch_out, _ = mlp_forward(spec, params, xs)
        for i in range(5):
            single, _ = mlp_forward(spec, params, xs[i])
            # BLAS may pick different kernels per shape; equal up to rounding
            np.testing.assert_allclose(batch_out[i], single, rtol=1e-12, atol=1e-15)

    def test_forward_determinism_bit_identical(self):
        rng = np.random.default_rng(7)
        spec = MlpSpec(6, (16, 8), 4)
        params = init_params(spec, rng, np.float32)
        x = rng.normal(size=6).astype(np.float32)
        a, _ = mlp_forward(spec, params, x)
        b, _ = mlp_forward(spec, params, x)
        assert np.array_equal(a, b)

    def test_dimension_mismatch_raises(self):
        spec = MlpSpec(3, (4,), 2)
        with pytest.raises(ConfigurationError):
            mlp_forward(spec, np.zeros(spec.param_count), np.ones(5))
        with pytest.raises(ConfigurationError):
            mlp_forward(spec, np.zeros(spec.param_count + 1), np.ones(3))

    def test_bad_spec_rejected(self):
        with pytest.raises(ConfigurationError):
            MlpSpec(0, (4,), 2)
        with pytest.raises(ConfigurationError):
            MlpSpec(3, (4,), 2, activation="tanh")


class TestBackward:
    def test_zero_output_grad_gives_zero_grads(self):
        rng = np.random.default_rng(1)
        spec = MlpSpec(3, (5,), 2)
        params = init_params(spec, rng, np.float64)
        out, trace = mlp_forward(spec, params, rng.normal(size=3))
        pg, ig = mlp_backward(spec, params, trace, np.zeros_like(out))
        assert np.all(pg == 0.0) and np.all(ig == 0.0)

    def test_single_linear_layer_calculus(self):
        # y = W x + b: dW = g x^T, db = g, dx = W^T g
        spec = MlpSpec(2, (), 2)
        w = np.array([[1.0, 2.0], [3.0, 4.0]])
        params = np.concatenate([w.ravel(), np.array([0.5, -0.5])])
        x = np.array([2.0, -1.0])
        g = np.array([1.0, -2.0])
        _, trace = mlp_forward(spec, params, x)
        pg, ig = mlp_backward(spec, params, trace, g)
        np.testing.assert_allclose(pg[:4].reshape(2, 2), np.outer(g, x))
        np.testing.assert_allclose(pg[4:], g)
        np.testing.assert_allclose(ig, w.T @ g)

    def test_gradient_matches_finite_differences(self):
        # random 4-8-3 net in float64, frozen seed-derived oracle
        rng = np.random.default_rng(42)
        spec = MlpSpec(4, (8,), 3)
        params = init_params(spec, rng, np.float64)
        x = rng.normal(size=4)
        g = rng.normal(size=3)

        def scalar(p):
            out, _ = mlp_forward(spec, p, x)
            return float(out @ g)

        _, trace = mlp_forward(spec, params, x)
        analytic, _ = mlp_backward(spec, params, trace, g)
        numeric = finite_difference_grad(scalar, params)
        assert_grads_close(analytic, numeric)

    def test_input_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        spec = MlpSpec(5, (9, 7), 2)
        params = init_params(spec, rng, np.float64)
        x = rng.normal(size=5)
        g = rng.normal(size=2)

        def scalar(xv):
            out, _ = mlp_forward(spec, params, xv)
            return float(out @ g)

        _, trace = mlp_forward(spec, params, x)
        _, input_grad = mlp_backward(spec, params, trace, g)
        numeric = finite_difference_grad(scalar, x)
        assert_grads_close(input_grad, numeric)

    def test_mismatched_trace_raises(self):
        rng = np.random.default_rng(4)
        spec_a = MlpSpec(3, (4,), 2)
        spec_b = MlpSpec(3, (4, 4), 2)
        params_a = init_params(spec_a, rng, np.float64)
        params_b = init_params(spec_b, rng, np.float64)
        _, trace = mlp_forward(spec_a, params_a, np.ones(3))
        with pytest.raises(RuntimeError):
            mlp_backward(spec_b, params_b, trace, np.ones(2))


class TestAdam:
    def test_zero_gradient_is_fixed_point(self):
        params = np.array([1.0, -2.0, 3.0])
        state = AdamState.fresh(3, lr=0.1, dtype=np.float64)
        new_params, new_state = adam_step(state, params, np.zeros(3))
        np.testing.assert_array_equal(new_params, params)
        assert new_state.step_count == 1

    def test_first_step_magnitude_is_lr(self):
        # scalar param 0, grad 1: bias-corrected m_hat = 1, v_hat = 1
        # -> update = lr / (1 + eps) ~ lr
        params = np.array([0.0])
        state = AdamState.fresh(1, lr=0.1, dtype=np.float64)
        new_params, _ = adam_step(state, params, np.array([1.0]))
        expected = -0.1 * 1.0 / (np.sqrt(1.0) + 1e-8)
        np.testing.assert_allclose(new_params[0], expected, rtol=1e-12)
        assert abs(new_params[0] + 0.1) < 1e-8

    def test_hand_evaluated_two_steps(self):
        # brute-force oracle: replay the recurrence by hand in float64
        lr, b1, b2, eps = 0.05, 0.9, 0.999, 1e-8
        grads = [np.array([0.3]), np.array([-0.7])]
        p = np.array([0.2])
        m = np.zeros(1)
        v = np.zeros(1)
        expected = p.copy()
        for t, g in enumerate(grads, start=1):
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            expected = expected - lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)

        state = AdamState(np.zeros(1), np.zeros(1), 0, lr, b1, b2, eps)
        actual = p.copy()
        for g in grads:
            actual, state = adam_step(state, actual, g)
        np.testing.assert_allclose(actual, expected, rtol=1e-12)
        assert state.step_count == 2

    def test_symmetry_of_identical_entries(self):
        params = np.array([0.5, 0.5])
        state = AdamState.fresh(2, lr=0.01, dtype=np.float64)
        new_params, _ = adam_step(state, params, np.array([0.25, 0.25]))
        assert new_params[0] == new_params[1]

    def test_non_finite_gradient_raises_with_step(self):
        state = AdamState.fresh(1, lr=0.1, dtype=np.float64)
        _, state = adam_step(state, np.zeros(1), np.ones(1))
        with pytest.raises(DivergenceError) as exc:
            adam_step(state, np.zeros(1), np.array([np.nan]))
        assert exc.value.step == 2


class TestClipAndPolyak:
    def test_clip_examples(self):
        np.testing.assert_array_equal(clip_gradients(np.array([0.5, -0.5]), 10.0), [0.5, -0.5])
        np.testing.assert_array_equal(clip_gradients(np.array([15.0, -20.0]), 10.0), [10.0, -10.0])
        np.testing.assert_array_equal(clip_gradients(np.zeros(3), 10.0), np.zeros(3))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=32),
           st.floats(1e-3, 1e3))
    def test_clip_is_idempotent_and_bounded(self, values, clip):
        g = np.array(values)
        once = clip_gradients(g, clip)
        twice = clip_gradients(once, clip)
        np.testing.assert_array_equal(once, twice)
        assert np.all(np.abs(once) <= clip)
        inside = np.abs(g) <= clip
        np.testing.assert_array_equal(once[inside], g[inside])

    def test_polyak_boundaries_and_arithmetic(self):
        target = np.zeros(3)
        online = np.full(3, 2.0)
        np.testing.assert_array_equal(polyak_update(target, online, 1.0), online)
        np.testing.assert_array_equal(polyak_update(target, online, 0.0), target)
        np.testing.assert_allclose(polyak_update(target, online, 0.25), np.full(3, 0.5))

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=16),
           st.floats(0.0, 1.0))
    def test_polyak_contracts_toward_online(self, values, tau):
        target = np.array(values)
        online = -target + 1.0
        updated = polyak_update(target, online, tau)
        lhs = np.abs(updated - online)
        rhs = (1.0 - tau) * np.abs(target - online)
        assert np.all(lhs <= rhs + 1e-9)

    def test_polyak_rejects_bad_tau(self):
        with pytest.raises(ConfigurationError):
            polyak_update(np.zeros(2), np.zeros(2), 1.5)
        with pytest.raises(ConfigurationError):
            polyak_update(np.zeros(2), np.zeros(2), -0.1)


class TestDueling:
    def test_examples(self):
        np.testing.assert_allclose(dueling_combine(1.0, np.zeros(3)), np.ones(3))
        np.testing.assert_allclose(dueling_combine(0.0, np.array([2.0, -2.0])), [2.0, -2.0])
        np.testing.assert_allclose(dueling_combine(5.0, np.array([1.0, 2.0, 3.0])), [4.0, 5.0, 6.0])

    @given(st.floats(-50, 50),
           st.lists(st.floats(-50, 50), min_size=1, max_size=8))
    @settings(max_examples=200)
    def test_mean_q_equals_value(self, value, advantages):
        q = dueling_combine(value, np.array(advantages, dtype=np.float64))
        assert abs(np.mean(q) - value) < 1e-12

    def test_backward_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        g = rng.normal(size=(3, 4))
        value = rng.normal(size=3)
        adv = rng.normal(size=(3, 4))

        def scalar(flat):
            v = flat[:3]
            a = flat[3:].reshape(3, 4)
            return float(np.sum(dueling_combine(v, a) * g))

        flat = np.concatenate([value, adv.ravel()])
        numeric = finite_difference_grad(scalar, flat)
        dv, da = dueling_combine_backward(g)
        analytic = np.concatenate([dv.ravel(), da.ravel()])
        assert_grads_close(analytic, numeric)

    def test_empty_advantages_rejected(self):
        with pytest.raises(ConfigurationError):
            dueling_combine(1.0, np.array([]))


class TestInit:
    def test_bounds_and_zero_bias(self):
        rng = np.random.default_rng(11)
        spec = MlpSpec(9, (16,), 4)
        params = init_params(spec, rng, np.float64)
        w1 = params[: 16 * 9]
        b1 = params[16 * 9 : 16 * 9 + 16]
        assert np.all(np.abs(w1) <= 1.0 / 3.0)
        assert np.all(b1 == 0.0)
        assert params.size == spec.param_count

    def test_deterministic_given_seed(self):
        spec = MlpSpec(4, (8, 8), 2)
        a = init_params(spec, np.random.default_rng(123), np.float32)
        b = init_params(spec, np.random.default_rng(123), np.float32)
        np.testing.assert_array_equal(a, b)
