"""Compiled hot loops for training and state harvesting.

These mirror the reference step functions in model.py exactly; the test
suite cross-checks trajectories elementwise and gradients against a
finite-difference oracle. Gradients here are the analytic reverse-mode
derivatives of the windowed loss

    mean_t (y[t] - d[t])^2 + lam * ||w_o||^2

truncated at the window boundary: the entering state is a constant.

Per-neuron cutoff gradients are returned unreduced (dg1n, dg2n per
neuron); callers sum them group-wise and chain through the sigmoid.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def tornn_seq(Wr, Wi, g1, g2, wo, bo, u, xp0, xpp0):
    """Full-sequence bandpass forward. Returns (outputs, xp_end, xpp_end).

    g1, g2 are per-neuron (already expanded from groups); Wi is (H,)
    for the scalar-input case.
    """
    n = u.shape[0]
    H = xp0.shape[0]
    xp = xp0.copy()
    xpp = xpp0.copy()
    ys = np.empty(n)
    x = xp - xpp
    for t in range(n):
        r = Wr @ x
        for i in range(H):
            xp[i] = np.tanh((1.0 - g1[i]) * xp[i] + g1[i] * r[i] + Wi[i] * u[t])
            xpp[i] = (1.0 - g2[i]) * xpp[i] + g2[i] * xp[i]
            x[i] = xp[i] - xpp[i]
        s = bo
        for i in range(H):
            s += wo[i] * x[i]
        ys[t] = s
    return ys, xp, xpp


@njit(cache=True)
def tornn_states(Wr, Wi, g1, g2, u, xp0, xpp0):
    """Forward pass recording every exposed state; used for ridge fits."""
    n = u.shape[0]
    H = xp0.shape[0]
    xp = xp0.copy()
    xpp = xpp0.copy()
    S = np.empty((n, H))
    x = xp - xpp
    for t in range(n):
        r = Wr @ x
        for i in range(H):
            xp[i] = np.tanh((1.0 - g1[i]) * xp[i] + g1[i] * r[i] + Wi[i] * u[t])
            xpp[i] = (1.0 - g2[i]) * xpp[i] + g2[i] * xp[i]
            x[i] = xp[i] - xpp[i]
            S[t, i] = x[i]
    return S, xp, xpp


@njit(cache=True)
def tornn_window(Wr, WrT, Wi, g1, g2, wo, bo, u, d, xp0, xpp0, lam):
    """One truncated window: forward, loss, exact in-window gradients.

    Returns (loss, dg1n, dg2n, dwo, dbo, xp_end, xpp_end, outputs).
    The backward recursion carries three adjoint streams: gxp for x',
    gxpp for x'', and gx for the exposed difference, peeled in reverse
    through the x'' lowpass first (it consumes x' after the tanh) and
    then through the tanh.
    """
    tau = u.shape[0]
    H = xp0.shape[0]
    XP = np.empty((tau + 1, H))
    XPP = np.empty((tau + 1, H))
    X = np.empty((tau + 1, H))
    R = np.empty((tau, H))
    XP[0] = xp0
    XPP[0] = xpp0
    X[0] = xp0 - xpp0
    ys = np.empty(tau)
    for t in range(tau):
        R[t] = Wr @ X[t]
        for i in range(H):
            XP[t + 1, i] = np.tanh((1.0 - g1[i]) * XP[t, i]
                                   + g1[i] * R[t, i] + Wi[i] * u[t])
            XPP[t + 1, i] = (1.0 - g2[i]) * XPP[t, i] + g2[i] * XP[t + 1, i]
            X[t + 1, i] = XP[t + 1, i] - XPP[t + 1, i]
        s = bo
        for i in range(H):
            s += wo[i] * X[t + 1, i]
        ys[t] = s
    loss = 0.0
    for t in range(tau):
        loss += (ys[t] - d[t]) ** 2
    loss /= tau
    for i in range(H):
        loss += lam * wo[i] * wo[i]
    dwo = 2.0 * lam * wo.copy()
    dbo = 0.0
    dg1n = np.zeros(H)
    dg2n = np.zeros(H)
    gxp_n = np.zeros(H)
    gxpp_n = np.zeros(H)
    gx_n = np.zeros(H)
    for t in range(tau, 0, -1):
        dy = 2.0 * (ys[t - 1] - d[t - 1]) / tau
        dbo += dy
        ga = np.empty(H)
        for i in range(H):
            dwo[i] += dy * X[t, i]
            gx = gx_n[i] + dy * wo[i]
            gxp = gxp_n[i] + gx
            gxpp = gxpp_n[i] - gx
            dg2n[i] += gxpp * (XP[t, i] - XPP[t - 1, i])
            gxp += g2[i] * gxpp
            gxpp_n[i] = (1.0 - g2[i]) * gxpp
            ga[i] = gxp * (1.0 - XP[t, i] ** 2)
            dg1n[i] += ga[i] * (R[t - 1, i] - XP[t - 1, i])
            gxp_n[i] = (1.0 - g1[i]) * ga[i]
            ga[i] *= g1[i]
        gx_n = WrT @ ga
    return loss, dg1n, dg2n, dwo, dbo, XP[tau], XPP[tau], ys


@njit(cache=True)
def ernn_seq(Wr, Wi, br, wo, bo, u, x0):
    """Full-sequence dense-RNN forward. Returns (outputs, x_end)."""
    n = u.shape[0]
    H = x0.shape[0]
    x = x0.copy()
    ys = np.empty(n)
    for t in range(n):
        a = Wr @ x
        for i in range(H):
            x[i] = np.tanh(a[i] + Wi[i] * u[t] + br[i])
        s = bo
        for i in range(H):
            s += wo[i] * x[i]
        ys[t] = s
    return ys, x


@njit(cache=True)
def ernn_window(Wr, WrT, Wi, br, wo, bo, u, d, x0, lam):
    """Truncated window for the fully trainable cell.

    Returns (loss, dWr, dWi, dbr, dwo, dbo, x_end, outputs).
    """
    tau = u.shape[0]
    H = x0.shape[0]
    XS = np.empty((tau + 1, H))
    XS[0] = x0
    ys = np.empty(tau)
    for t in range(tau):
        a = Wr @ XS[t]
        for i in range(H):
            XS[t + 1, i] = np.tanh(a[i] + Wi[i] * u[t] + br[i])
        s = bo
        for i in range(H):
            s += wo[i] * XS[t + 1, i]
        ys[t] = s
    loss = 0.0
    for t in range(tau):
        loss += (ys[t] - d[t]) ** 2
    loss /= tau
    for i in range(H):
        loss += lam * wo[i] * wo[i]
    dWr = np.zeros_like(Wr)
    dWi = np.zeros(H)
    dbr = np.zeros(H)
    dwo = 2.0 * lam * wo.copy()
    dbo = 0.0
    gx = np.zeros(H)
    for t in range(tau, 0, -1):
        dy = 2.0 * (ys[t - 1] - d[t - 1]) / tau
        dbo += dy
        for i in range(H):
            dwo[i] += dy * XS[t, i]
            gx[i] += dy * wo[i]
        da = gx * (1.0 - XS[t] ** 2)
        for i in range(H):
            dWi[i] += da[i] * u[t - 1]
            dbr[i] += da[i]
            for j in range(H):
                dWr[i, j] += da[i] * XS[t - 1, j]
        gx = WrT @ da
    return loss, dWr, dWi, dbr, dwo, dbo, XS[tau], ys


@njit(cache=True)
def esn_states(Wr, Wi, Wf, gamma, omega_i, omega_f, xi, u, y_fb, noise, x0):
    """Leaky reservoir harvest with a prescribed feedback sequence.

    y_fb[t] is the (already scaled) feedback value entering the update at
    time t; noise is a pregenerated (n, H) standard normal block so the
    caller owns all randomness. Returns (states (n, H), x_end).
    """
    n = u.shape[0]
    H = x0.shape[0]
    x = x0.copy()
    S = np.empty((n, H))
    for t in range(n):
        r = Wr @ x
        for i in range(H):
            pre = (1.0 - gamma) * x[i] + gamma * r[i] + omega_i * Wi[i] * u[t]
            pre += omega_f * Wf[i] * y_fb[t]
            x[i] = np.tanh(pre) + xi * noise[t, i]
            S[t, i] = x[i]
    return S, x


@njit(cache=True)
def esn_predict(Wr, Wi, Wf, gamma, omega_i, omega_f, xi, u, noise, x0,
                w, b, y0):
    """Free-running evaluation: the feedback path consumes the model's own
    (scaled) readout value from the previous step. Returns (scaled outputs,
    x_end)."""
    n = u.shape[0]
    H = x0.shape[0]
    x = x0.copy()
    ys = np.empty(n)
    y_prev = y0
    for t in range(n):
        r = Wr @ x
        for i in range(H):
            pre = (1.0 - gamma) * x[i] + gamma * r[i] + omega_i * Wi[i] * u[t]
            pre += omega_f * Wf[i] * y_prev
            x[i] = np.tanh(pre) + xi * noise[t, i]
        s = b
        for i in range(H):
            s += w[i] * x[i]
        ys[t] = s
        y_prev = s
    return ys, x
