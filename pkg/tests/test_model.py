"""Forward dynamics: bandpass cell, reservoir cell, dense cell, readout."""

import numpy as np
import pytest
from scipy.special import expit

from tornn._kernels import tornn_seq
from tornn.model import (
    ErnnWeights,
    GammaParams,
    ModelState,
    Readout,
    checkpoint_from_json,
    checkpoint_to_json,
    count_ernn_params,
    count_trainable_params,
    ernn_step,
    esn_step,
    readout_apply,
    run_sequence,
    sigmoid,
    tornn_step,
)
from tornn.topology import NetworkWeights, build_topology


def single_neuron(w_r=0.0, w_i=1.0):
    return NetworkWeights(
        W_r=np.array([[w_r]]), W_i=np.array([[w_i]]),
        group=np.zeros(1, dtype=int), K=1, N=1, p=0.4, q=0.1,
        rho=0.95, seed=0)


# ------------------------------------------------------------------- sigmoid

def test_sigmoid_matches_expit():
    z = np.linspace(-40, 40, 101)
    np.testing.assert_allclose(sigmoid(z), expit(z), atol=1e-15)


def test_sigmoid_extreme_arguments_stay_finite():
    out = sigmoid(np.array([-1e4, 0.0, 1e4]))
    assert np.all(np.isfinite(out))
    assert out[0] == 0.0 and out[1] == 0.5 and out[2] == 1.0


# -------------------------------------------------------------------- gammas

def test_gamma_params_roundtrip():
    g1 = np.array([0.1, 0.5, 0.93])
    g2 = np.array([0.02, 0.4, 0.88])
    gp = GammaParams.from_gammas(g1, g2)
    np.testing.assert_allclose(gp.gamma1, g1, atol=1e-12)
    np.testing.assert_allclose(gp.gamma2, g2, atol=1e-12)


def test_gamma_params_rejects_boundary():
    for bad in ([0.0], [1.0], [-0.2], [1.5]):
        with pytest.raises(ValueError, match="strictly"):
            GammaParams.from_gammas(bad, [0.5])
        with pytest.raises(ValueError):
            GammaParams.from_gammas([0.5], bad)


def test_gammas_always_in_open_interval():
    # sigmoid parametrization keeps cutoffs valid across the theta range
    # where float64 can still represent the strict inequality
    gp = GammaParams(theta1=np.array([-30.0, 0.0, 30.0]),
                     theta2=np.array([25.0, -25.0, 0.0]))
    assert np.all((gp.gamma1 > 0) & (gp.gamma1 < 1))
    assert np.all((gp.gamma2 > 0) & (gp.gamma2 < 1))


# ------------------------------------------------------------- bandpass cell

def test_tornn_step_hand_computed_scalar_case():
    # x'=0.2, x''=0.1, u=0.3, w_r=0.5, w_i=1, g1=0.5, g2=0.25:
    #   x'_new = tanh(0.5*0.2 + 0.5*(0.5*0.1) + 0.3) = tanh(0.425)
    #   x''_new = 0.75*0.1 + 0.25*x'_new
    w = single_neuron(w_r=0.5, w_i=1.0)
    g = GammaParams.from_gammas([0.5], [0.25])
    state = ModelState(x_prime=np.array([0.2]), x_second=np.array([0.1]))
    out = tornn_step(state, 0.3, w, g)
    assert out.x_prime[0] == pytest.approx(0.40113428494794584, abs=1e-14)
    assert out.x_second[0] == pytest.approx(0.17528357123698646, abs=1e-14)
    assert out.x[0] == pytest.approx(0.22585071371095938, abs=1e-14)


def test_tornn_step_input_enters_at_full_scale():
    # halving g1 must not halve the input contribution
    state = ModelState.zeros(1)
    w = single_neuron(w_r=0.0, w_i=1.0)
    a = tornn_step(state, 0.2, w, GammaParams.from_gammas([0.9], [0.5]))
    b = tornn_step(state, 0.2, w, GammaParams.from_gammas([0.45], [0.5]))
    assert a.x_prime[0] == pytest.approx(np.tanh(0.2))
    assert b.x_prime[0] == pytest.approx(np.tanh(0.2))


def test_tornn_step_zero_fixed_point():
    w = build_topology(K=2, N=5, seed=0)
    g = GammaParams.from_gammas([0.3, 0.7], [0.1, 0.2])
    out = tornn_step(ModelState.zeros(10), 0.0, w, g)
    np.testing.assert_array_equal(out.x, np.zeros(10))


def test_tornn_state_invariants_under_random_drive():
    rng = np.random.default_rng(8)
    w = build_topology(K=3, N=10, seed=1)
    g = GammaParams.from_gammas([0.2, 0.5, 0.9], [0.05, 0.3, 0.6])
    state = ModelState.zeros(30)
    for _ in range(200):
        state = tornn_step(state, rng.standard_normal(), w, g)
        np.testing.assert_array_equal(state.x, state.x_prime - state.x_second)
        assert np.all(np.abs(state.x_prime) <= 1.0)  # tanh range
        assert np.all(np.abs(state.x_second) <= 1.0)  # convex combination


def test_tornn_groups_share_cutoffs():
    # neurons in the same group must see the same (g1, g2) pair: two groups
    # with identical gammas behave like one group
    w = build_topology(K=2, N=10, seed=3)
    g_split = GammaParams.from_gammas([0.4, 0.4], [0.2, 0.2])
    g_merged = GammaParams.from_gammas([0.4, 0.4], [0.2, 0.2])
    rng = np.random.default_rng(0)
    u = rng.standard_normal(50)
    ro = Readout(W_o=np.zeros(20))
    xs_a, _, _ = run_sequence(w, g_split, ro, u)
    xs_b, _, _ = run_sequence(w, g_merged, ro, u)
    np.testing.assert_array_equal(xs_a, xs_b)


def test_bandpass_attenuates_dc_and_passes_band():
    # small-amplitude drive keeps tanh linear; amplitude gain measured on
    # the steady-state tail must vanish toward DC
    w = single_neuron(w_r=0.0, w_i=1.0)
    g = GammaParams.from_gammas([0.5], [0.1])
    ro = Readout(W_o=np.ones(1))

    def gain(omega, T=20000, A=1e-4):
        t = np.arange(1, T + 1)
        _, ys, _ = run_sequence(w, g, ro, A * np.sin(omega * t))
        tail = ys[-5000:]
        return (tail.max() - tail.min()) / 2 / A

    g_dc = gain(1e-4)
    g_band = gain(0.2)
    assert g_band > 0.5
    assert g_dc / g_band < 0.01


def test_tornn_nonfinite_input_reports_time_index():
    w = single_neuron()
    g = GammaParams.from_gammas([0.5], [0.5])
    u = np.zeros(10)
    u[4] = np.nan
    with pytest.raises(FloatingPointError, match="time index 4"):
        run_sequence(w, g, Readout(W_o=np.zeros(1)), u)


# ----------------------------------------------------------------- reduction

def test_reduces_to_plain_reservoir_at_limit_cutoffs():
    # g1 -> 1, g2 -> 0 turns the bandpass cell into x = tanh(W_r x + W_i u).
    # With 1e-8 offsets the second stage accumulates ~g2 * sum|x'| of drift
    # over the run, so the elementwise tolerance is 1e-6 on a fixed input.
    w = build_topology(K=2, N=20, seed=11)
    g = GammaParams.from_gammas([1 - 1e-8] * 2, [1e-8] * 2)
    u = np.random.default_rng(0).standard_normal(500)
    state = ModelState.zeros(40)
    x_esn = np.zeros(40)
    for t in range(500):
        state = tornn_step(state, u[t], w, g)
        x_esn = esn_step(x_esn, u[t], w.W_r, w.W_i, gamma=1.0, omega_i=1.0)
        np.testing.assert_allclose(state.x, x_esn, atol=1e-6)


def test_reduction_is_exact_at_saturated_thetas():
    # at the representable extremes sigmoid gives exactly 1.0 and 0.0, the
    # second stage never moves, and the two recursions agree to roundoff
    w = build_topology(K=2, N=20, seed=11)
    g = GammaParams(theta1=np.full(2, 800.0), theta2=np.full(2, -800.0))
    assert g.gamma1[0] == 1.0 and g.gamma2[0] == 0.0
    u = np.random.default_rng(2).standard_normal(500)
    state = ModelState.zeros(40)
    x_esn = np.zeros(40)
    for t in range(500):
        state = tornn_step(state, u[t], w, g)
        x_esn = esn_step(x_esn, u[t], w.W_r, w.W_i, gamma=1.0, omega_i=1.0)
        np.testing.assert_allclose(state.x, x_esn, atol=1e-12)
    np.testing.assert_array_equal(state.x_second, np.zeros(40))


# ------------------------------------------------------------ reservoir cell

def test_esn_step_hand_computed_scalar_case():
    # x=0.2, u=0.3, w_r=0.5, w_i=1, gamma=0.5, omega_i=0.7
    x = esn_step(np.array([0.2]), 0.3, np.array([[0.5]]), np.array([[1.0]]),
                 gamma=0.5, omega_i=0.7)
    assert x[0] == pytest.approx(0.34521403413552093, abs=1e-14)


def test_esn_step_full_leak_is_plain_tanh():
    rng = np.random.default_rng(4)
    W_r = rng.standard_normal((10, 10)) * 0.1
    W_i = rng.standard_normal((10, 1))
    x = rng.standard_normal(10)
    got = esn_step(x, 0.5, W_r, W_i, gamma=1.0, omega_i=0.8)
    np.testing.assert_allclose(got, np.tanh(W_r @ x + 0.8 * W_i[:, 0] * 0.5))


def test_esn_step_feedback_term():
    rng = np.random.default_rng(5)
    W_r = rng.standard_normal((6, 6)) * 0.1
    W_i = rng.standard_normal((6, 1))
    W_f = rng.standard_normal(6)
    x = rng.standard_normal(6)
    got = esn_step(x, 0.1, W_r, W_i, gamma=0.6, omega_i=0.5,
                   omega_f=0.3, W_f=W_f, y_prev=1.7)
    pre = 0.4 * x + 0.6 * (W_r @ x) + 0.5 * W_i[:, 0] * 0.1 + 0.3 * W_f * 1.7
    np.testing.assert_allclose(got, np.tanh(pre))


def test_esn_step_noise_is_additive_and_seeded():
    W_r = np.zeros((4, 4))
    W_i = np.zeros((4, 1))
    x = np.zeros(4)
    a = esn_step(x, 0.0, W_r, W_i, gamma=1.0, omega_i=1.0, xi=0.01,
                 rng=np.random.default_rng(7))
    b = esn_step(x, 0.0, W_r, W_i, gamma=1.0, omega_i=1.0, xi=0.01,
                 rng=np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(
        a, 0.01 * np.random.default_rng(7).standard_normal(4))


def test_esn_step_validation():
    args = (np.zeros(2), 0.0, np.zeros((2, 2)), np.zeros((2, 1)))
    with pytest.raises(ValueError, match="gamma"):
        esn_step(*args, gamma=0.0, omega_i=1.0)
    with pytest.raises(ValueError, match="xi"):
        esn_step(*args, gamma=1.0, omega_i=1.0, xi=-0.1)


# ----------------------------------------------------------------- ernn cell

def test_ernn_step_definition():
    rng = np.random.default_rng(6)
    w = ErnnWeights(W_r=rng.standard_normal((5, 5)),
                    W_i=rng.standard_normal((5, 1)),
                    b_r=rng.standard_normal(5))
    x = rng.standard_normal(5)
    got = ernn_step(x, 0.4, w)
    np.testing.assert_allclose(got, np.tanh(w.W_r @ x + w.W_i[:, 0] * 0.4 + w.b_r))


def test_ernn_matches_reservoir_cell_when_configured_alike():
    rng = np.random.default_rng(3)
    W_r = rng.standard_normal((8, 8)) * 0.2
    W_i = rng.standard_normal((8, 1))
    w = ErnnWeights(W_r=W_r, W_i=W_i, b_r=np.zeros(8))
    x = rng.standard_normal(8)
    np.testing.assert_allclose(
        ernn_step(x, 0.9, w),
        esn_step(x, 0.9, W_r, W_i, gamma=1.0, omega_i=1.0))


# ------------------------------------------------------- sequences / readout

def test_readout_apply_affine():
    ro = Readout(W_o=np.array([1.0, -2.0]), bias=0.25)
    assert readout_apply(ro, np.array([3.0, 1.0])) == pytest.approx(1.25)


def test_run_sequence_matches_compiled_kernel():
    # python step function against the compiled full-sequence kernel
    w = build_topology(K=2, N=20, seed=21)
    g = GammaParams.from_gammas([0.3, 0.8], [0.1, 0.4])
    ro = Readout(W_o=np.random.default_rng(1).standard_normal(40), bias=0.3)
    u = np.random.default_rng(2).standard_normal(100)
    xs, ys, fin = run_sequence(w, g, ro, u)
    g1 = g.gamma1[w.group]
    g2 = g.gamma2[w.group]
    ys_k, xp_end, xpp_end = tornn_seq(
        w.W_r, w.W_i[:, 0], g1, g2, ro.W_o, ro.bias, u,
        np.zeros(40), np.zeros(40))
    np.testing.assert_allclose(ys, ys_k, atol=1e-12)
    np.testing.assert_allclose(fin.x_prime, xp_end, atol=1e-12)
    np.testing.assert_allclose(fin.x_second, xpp_end, atol=1e-12)
    np.testing.assert_allclose(xs[-1], xp_end - xpp_end, atol=1e-12)


def test_run_sequence_empty_input():
    w = single_neuron()
    g = GammaParams.from_gammas([0.5], [0.5])
    xs, ys, fin = run_sequence(w, g, Readout(W_o=np.zeros(1)), [])
    assert xs.shape == (0, 1) and ys.shape == (0,)
    np.testing.assert_array_equal(fin.x, np.zeros(1))


# ------------------------------------------------------------ param budgets

@pytest.mark.parametrize("K,want", [(2, 45), (3, 67), (5, 111), (7, 155)])
def test_trainable_param_budget(K, want):
    # 2K cutoff parameters + 20K readout weights + 1 bias
    assert count_trainable_params(K, N=20) == want
    assert count_trainable_params(K, N=20) == 2 * K + 20 * K + 1


def test_ernn_param_budget():
    assert count_ernn_params(91, input_dim=1) == 8555


# ---------------------------------------------------------------- checkpoint

def test_checkpoint_roundtrip_bit_exact():
    w = build_topology(K=2, N=20, seed=17)
    g = GammaParams(theta1=np.array([0.3, -1.2]), theta2=np.array([2.0, 0.0]))
    ro = Readout(W_o=np.random.default_rng(0).standard_normal(40), bias=-0.7)
    w2, g2, ro2 = checkpoint_from_json(checkpoint_to_json(w, g, ro))
    np.testing.assert_array_equal(w2.W_r, w.W_r)
    np.testing.assert_array_equal(w2.W_i, w.W_i)
    np.testing.assert_array_equal(g2.theta1, g.theta1)
    np.testing.assert_array_equal(g2.theta2, g.theta2)
    np.testing.assert_array_equal(ro2.W_o, ro.W_o)
    assert ro2.bias == ro.bias
