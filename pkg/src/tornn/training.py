"""Gradient training: truncated BPTT with Adam for both trainable models.

The training range is consumed as consecutive tau_tnc-step windows. State
carries forward across windows but gradients do not: each window treats
its entering state as a constant. One Adam step is taken per window. After
every epoch the validation NRMSE is measured and the best parameters are
checkpointed; training stops on patience exhaustion or the epoch cap.

For the bandpass network only the per-group cutoff parameters and the
readout train; the random matrices are never touched. The cutoff init is
chosen by a small seeded candidate search anchored at the detected
spectral peaks of the training signal (see `anchor_frequencies`), and the
readout starts from the ridge solution at that init. Both choices exist
because a cold-started readout converges far too slowly under windowed
Adam at the fixed learning rate; the search is deterministic per seed.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .model import ErnnWeights, GammaParams, Readout, sigmoid
from .timeseries import (SupervisedDataset, nrmse, peak_frequencies,
                         psd_estimate)
from .topology import NetworkWeights


@dataclass
class TrainConfig:
    tau_tnc: int = 10
    lam: float = 1e-5
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_epochs: int = 2000
    patience: int = 50
    seed: int = 0
    init_candidates: int = 24  # bandpass cutoff-init search size

    def __post_init__(self):
        if self.tau_tnc < 1:
            raise ValueError(f"tau_tnc must be >= 1, got {self.tau_tnc}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must be in [0, 1)")


@dataclass
class GradientBundle:
    d_theta1: np.ndarray
    d_theta2: np.ndarray
    d_W_o: np.ndarray
    d_bias: float
    loss: float
    # dense-cell extras; None for the bandpass model
    d_W_r: np.ndarray | None = None
    d_W_i: np.ndarray | None = None
    d_b_r: np.ndarray | None = None


@dataclass
class TrainResult:
    val_nrmse: float
    epochs_run: int
    curve: list = field(default_factory=list)  # rows of the curve CSV


class TrainingDivergence(RuntimeError):
    pass


def loss(outputs, targets, W_o, lam: float) -> float:
    """Window loss: mean squared error plus lam * ||W_o||^2."""
    outputs = np.asarray(outputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if outputs.size == 0 or outputs.shape != targets.shape:
        raise ValueError("empty or misaligned window")
    return float(np.mean((outputs - targets) ** 2)
                 + lam * np.sum(np.asarray(W_o) ** 2))


def tbptt_gradients(weights: NetworkWeights, gammas: GammaParams,
                    readout: Readout, u, d, state_xp, state_xpp,
                    lam: float) -> tuple[GradientBundle, np.ndarray, np.ndarray]:
    """Exact in-window reverse-mode gradients for the bandpass model.

    Window loss is differentiated w.r.t. theta1, theta2 (through the
    sigmoid), W_o, and bias. Returns the bundle plus the window-exit
    state so callers can continue statefully.
    """
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    g1 = gammas.gamma1
    g2 = gammas.gamma2
    g1n = g1[weights.group]
    g2n = g2[weights.group]
    Wi = np.ascontiguousarray(weights.W_i[:, 0])
    out = kern.tornn_window(weights.W_r, weights.W_r.T.copy(), Wi,
                            g1n, g2n, readout.W_o, readout.bias,
                            u, d, state_xp, state_xpp, lam)
    window_loss, dg1n, dg2n, dwo, dbo, xp_end, xpp_end, _ = out
    if not np.isfinite(window_loss):
        raise TrainingDivergence("non-finite loss inside window")
    K = len(g1)
    dg1 = np.zeros(K)
    dg2 = np.zeros(K)
    np.add.at(dg1, weights.group, dg1n)
    np.add.at(dg2, weights.group, dg2n)
    bundle = GradientBundle(
        d_theta1=dg1 * g1 * (1 - g1),
        d_theta2=dg2 * g2 * (1 - g2),
        d_W_o=dwo, d_bias=float(dbo), loss=float(window_loss))
    return bundle, xp_end, xpp_end


def ernn_gradients(w: ErnnWeights, readout: Readout, u, d, state_x,
                   lam: float) -> tuple[GradientBundle, np.ndarray]:
    """Exact in-window gradients for the dense cell (all weights train)."""
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    Wi = np.ascontiguousarray(w.W_i[:, 0])
    out = kern.ernn_window(w.W_r, w.W_r.T.copy(), Wi, w.b_r,
                           readout.W_o, readout.bias, u, d, state_x, lam)
    window_loss, dWr, dWi, dbr, dwo, dbo, x_end, _ = out
    if not np.isfinite(window_loss):
        raise TrainingDivergence("non-finite loss inside window")
    bundle = GradientBundle(
        d_theta1=np.empty(0), d_theta2=np.empty(0),
        d_W_o=dwo, d_bias=float(dbo), loss=float(window_loss),
        d_W_r=dWr, d_W_i=dWi.reshape(-1, 1), d_b_r=dbr)
    return bundle, x_end


def adam_update(params: dict, grads: dict, moments: dict, t: int,
                cfg: TrainConfig) -> tuple[dict, dict]:
    """One bias-corrected Adam step over a named family of parameters.

    moments maps name -> (m, v); t is the 1-based global step count.
    """
    if t < 1:
        raise ValueError(f"step index must be >= 1, got {t}")
    new_params = {}
    new_moments = {}
    for name, p in params.items():
        g = grads[name]
        if np.shape(g) != np.shape(p):
            raise ValueError(f"gradient shape mismatch for {name}")
        m, v = moments.get(name, (np.zeros_like(p), np.zeros_like(p)))
        m = cfg.beta1 * m + (1 - cfg.beta1) * g
        v = cfg.beta2 * v + (1 - cfg.beta2) * np.square(g)
        m_hat = m / (1 - cfg.beta1 ** t)
        v_hat = v / (1 - cfg.beta2 ** t)
        new_params[name] = p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        new_moments[name] = (m, v)
    return new_params, new_moments


def anchor_frequencies(values, K: int) -> np.ndarray:
    """K angular frequencies to anchor the cutoff init, from Welch peaks.

    Tries prominence 0.05, then 0.1 (better under noise), then 0.02. If
    the detected count still differs from K, the K most prominent peaks
    are kept, or the detected band is padded geometrically when too few.
    """
    values = np.asarray(values, dtype=float)
    seg = 1024
    while seg > len(values):
        seg //= 2
    sp = psd_estimate(values, segment_len=seg)
    freqs = np.empty(0)
    for prom in (0.05, 0.1, 0.02):
        freqs = peak_frequencies(sp, prominence=prom)
        if len(freqs) == K:
            break
    if len(freqs) > K:
        from scipy.signal import find_peaks
        idx, props = find_peaks(sp.power, prominence=0.02 * sp.power.max())
        order = np.argsort(props["prominences"])[::-1][:K]
        freqs = np.sort(sp.frequencies[idx[order]])
    elif len(freqs) < K:
        lo = freqs[0] if len(freqs) else 1.0 / len(values)
        hi = freqs[-1] if len(freqs) else 0.25
        if hi < 4 * lo:  # detected band too narrow to spread K anchors
            lo, hi = lo / 4, hi * 4
        freqs = np.geomspace(max(lo, 1e-6), max(hi, 2e-6), K)
    return 2 * np.pi * freqs


def _init_candidates(om: np.ndarray, n_cand: int,
                     rng: np.random.Generator) -> list:
    """Cutoff candidates anchored at the angular peak frequencies om.

    The first-stage cutoff scales with the target band (a*om) and the
    second stage sits below it (om/b); jitter explores around the rule.
    """
    K = len(om)
    cands = [(np.clip(40 * om, 0.01, 0.95), np.clip(om / 10, 1e-4, 0.5)),
             (np.clip(20 * om, 0.01, 0.95), np.clip(om / 3, 1e-4, 0.5))]
    while len(cands) < n_cand:
        L1 = np.exp(rng.normal(0, np.log(2), K))
        L2 = np.exp(rng.normal(0, np.log(3), K))
        a = rng.choice([10.0, 20.0, 40.0, 80.0])
        b = rng.choice([3.0, 10.0, 30.0])
        cands.append((np.clip(a * om * L1, 0.01, 0.95),
                      np.clip(om / b * L2, 1e-4, 0.5)))
    return cands


def _ridge_vec(A: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    # small symmetric solve; the esnfit module owns the public ridge op
    G = A.T @ A + lam * np.eye(A.shape[1])
    return np.linalg.solve(G, A.T @ y)


def _dataset_arrays(ds: SupervisedDataset):
    tr, va = ds.train_range, ds.val_range
    utr = ds.inputs[tr.start:tr.stop]
    dtr = ds.targets[tr.start:tr.stop]
    uva = ds.inputs[va.start:va.stop]
    dva = ds.targets[va.start:va.stop]
    return utr, dtr, uva, dva


def init_tornn_fit(weights: NetworkWeights, ds: SupervisedDataset,
                   cfg: TrainConfig):
    """Seeded init search: anchored cutoff candidates scored by the
    validation NRMSE of a ridge readout fitted on the training states.

    Returns (GammaParams, Readout, init validation NRMSE).
    """
    utr, dtr, uva, dva = _dataset_arrays(ds)
    H = weights.H
    om = anchor_frequencies(utr, weights.K)
    rng = np.random.default_rng(
        np.random.SeedSequence(cfg.seed).generate_state(4)[3])
    Wi = np.ascontiguousarray(weights.W_i[:, 0])
    n_tv = len(utr) + len(uva)
    u_tv = ds.inputs[:n_tv]
    dvv = np.mean((dva - dva.mean()) ** 2)
    best = None
    for g1k, g2k in _init_candidates(om, cfg.init_candidates, rng):
        g1n, g2n = g1k[weights.group], g2k[weights.group]
        S, _, _ = kern.tornn_states(weights.W_r, Wi, g1n, g2n, u_tv,
                                    np.zeros(H), np.zeros(H))
        A = np.hstack([S, np.ones((n_tv, 1))])
        w = _ridge_vec(A[ds.washout:len(utr)], dtr[ds.washout:], cfg.lam)
        yv = A[len(utr):] @ w
        vn = float(np.sqrt(np.mean((yv - dva) ** 2) / dvv))
        if best is None or vn < best[0]:
            best = (vn, g1k, g2k, w)
    v0, g1k, g2k, w = best
    return (GammaParams.from_gammas(g1k, g2k),
            Readout(W_o=w[:H].copy(), bias=float(w[H])), v0)


def train_tornn(weights: NetworkWeights, ds: SupervisedDataset,
                cfg: TrainConfig):
    """Fit cutoffs and readout by stateful truncated BPTT with Adam.

    Returns (GammaParams, Readout, TrainResult). W_r and W_i are read-only
    throughout; an assertion guards the invariant.
    """
    wr_before = weights.W_r.tobytes()
    wi_before = weights.W_i.tobytes()
    utr, dtr, uva, dva = _dataset_arrays(ds)
    H = weights.H
    K = weights.K
    group = weights.group
    Wi = np.ascontiguousarray(weights.W_i[:, 0])
    WrT = weights.W_r.T.copy()
    dvv = np.mean((dva - dva.mean()) ** 2)
    gammas, readout, v0 = init_tornn_fit(weights, ds, cfg)
    th1 = gammas.theta1.copy()
    th2 = gammas.theta2.copy()
    wo = readout.W_o.copy()
    bo = readout.bias

    nwin = (len(utr) - ds.washout) // cfg.tau_tnc
    if nwin < 1:
        raise ValueError("training range shorter than washout plus one window")
    moments = {}
    tstep = 0
    best = (v0, (th1.copy(), th2.copy(), wo.copy(), bo))
    curve = [_curve_row(0, np.nan, v0, th1, th2)]
    bad = 0
    epochs_run = 0
    for epoch in range(1, cfg.max_epochs + 1):
        g1n = sigmoid(th1)[group]
        g2n = sigmoid(th2)[group]
        _, xp, xpp = kern.tornn_seq(weights.W_r, Wi, g1n, g2n, wo, bo,
                                    utr[:ds.washout], np.zeros(H), np.zeros(H))
        epoch_loss = 0.0
        for w_idx in range(nwin):
            lo = ds.washout + w_idx * cfg.tau_tnc
            sl = slice(lo, lo + cfg.tau_tnc)
            out = kern.tornn_window(weights.W_r, WrT, Wi, g1n, g2n, wo, bo,
                                    utr[sl], dtr[sl], xp, xpp, cfg.lam)
            wloss, dg1n, dg2n, dwo, dbo, xp, xpp, _ = out
            if not np.isfinite(wloss):
                raise TrainingDivergence(
                    f"non-finite loss at epoch {epoch}, window {w_idx}")
            epoch_loss += wloss
            g1 = sigmoid(th1)
            g2 = sigmoid(th2)
            dth1 = np.zeros(K)
            dth2 = np.zeros(K)
            np.add.at(dth1, group, dg1n)
            np.add.at(dth2, group, dg2n)
            grads = {"theta1": dth1 * g1 * (1 - g1),
                     "theta2": dth2 * g2 * (1 - g2),
                     "W_o": dwo, "bias": dbo}
            params = {"theta1": th1, "theta2": th2, "W_o": wo, "bias": bo}
            tstep += 1
            params, moments = adam_update(params, grads, moments, tstep, cfg)
            th1, th2 = params["theta1"], params["theta2"]
            wo, bo = params["W_o"], float(params["bias"])
            g1n = sigmoid(th1)[group]
            g2n = sigmoid(th2)[group]
        _, xpv, xppv = kern.tornn_seq(weights.W_r, Wi, g1n, g2n, wo, bo,
                                      utr, np.zeros(H), np.zeros(H))
        yv, _, _ = kern.tornn_seq(weights.W_r, Wi, g1n, g2n, wo, bo,
                                  uva, xpv, xppv)
        vn = float(np.sqrt(np.mean((yv - dva) ** 2) / dvv))
        if not np.isfinite(vn) or vn > 1e3:
            raise TrainingDivergence(
                f"validation NRMSE {vn} at epoch {epoch}")
        curve.append(_curve_row(epoch, epoch_loss / nwin, vn, th1, th2))
        epochs_run = epoch
        if vn < best[0] - 1e-6:
            best = (vn, (th1.copy(), th2.copy(), wo.copy(), bo))
            bad = 0
        else:
            bad += 1
            if bad >= cfg.patience:
                break
    th1, th2, wo, bo = best[1]
    assert weights.W_r.tobytes() == wr_before
    assert weights.W_i.tobytes() == wi_before
    gammas = GammaParams(theta1=th1, theta2=th2)
    readout = Readout(W_o=wo, bias=bo)
    result = TrainResult(val_nrmse=best[0], epochs_run=epochs_run, curve=curve)
    return gammas, readout, result


def _curve_row(epoch, train_loss, val_nrmse, th1, th2):
    return ([epoch, train_loss, val_nrmse]
            + list(sigmoid(th1)) + list(sigmoid(th2)))


def curve_to_csv(curve, path, K: int) -> None:
    header = ("epoch,train_loss,val_nrmse,"
              + ",".join(f"gamma1_{k+1}" for k in range(K)) + ","
              + ",".join(f"gamma2_{k+1}" for k in range(K)))
    np.savetxt(path, np.asarray(curve, dtype=float), delimiter=",",
               header=header, comments="", fmt="%.10g")


def init_ernn(H: int, seed: int, input_dim: int = 1):
    """Dense-cell init: every trainable entry ~ N(0, 1/sqrt(d)) with d the
    size of the layer the weight feeds into (the readout feeds one unit).
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed).generate_state(1)[0])
    s = 1.0 / np.sqrt(H)
    w = ErnnWeights(W_r=rng.normal(0.0, s, (H, H)),
                    W_i=rng.normal(0.0, s, (H, input_dim)),
                    b_r=rng.normal(0.0, s, H))
    readout = Readout(W_o=rng.normal(0.0, 1.0, H), bias=float(rng.normal()))
    return w, readout


def train_ernn(H: int, ds: SupervisedDataset, cfg: TrainConfig):
    """Same loop as train_tornn but every weight matrix trains."""
    utr, dtr, uva, dva = _dataset_arrays(ds)
    dvv = np.mean((dva - dva.mean()) ** 2)
    w, readout = init_ernn(H, cfg.seed)
    Wr, Wi1 = w.W_r, np.ascontiguousarray(w.W_i[:, 0])
    br, wo, bo = w.b_r, readout.W_o, readout.bias
    nwin = (len(utr) - ds.washout) // cfg.tau_tnc
    if nwin < 1:
        raise ValueError("training range shorter than washout plus one window")
    moments = {}
    tstep = 0
    best = (np.inf, None)
    curve = []
    bad = 0
    epochs_run = 0
    for epoch in range(1, cfg.max_epochs + 1):
        _, x = kern.ernn_seq(Wr, Wi1, br, wo, bo, utr[:ds.washout], np.zeros(H))
        epoch_loss = 0.0
        for w_idx in range(nwin):
            lo = ds.washout + w_idx * cfg.tau_tnc
            sl = slice(lo, lo + cfg.tau_tnc)
            out = kern.ernn_window(Wr, Wr.T.copy(), Wi1, br, wo, bo,
                                   utr[sl], dtr[sl], x, cfg.lam)
            wloss, dWr, dWi, dbr, dwo, dbo, x, _ = out
            if not np.isfinite(wloss):
                raise TrainingDivergence(
                    f"non-finite loss at epoch {epoch}, window {w_idx}")
            epoch_loss += wloss
            grads = {"W_r": dWr, "W_i": dWi, "b_r": dbr, "W_o": dwo,
                     "bias": dbo}
            params = {"W_r": Wr, "W_i": Wi1, "b_r": br, "W_o": wo,
                      "bias": bo}
            tstep += 1
            params, moments = adam_update(params, grads, moments, tstep, cfg)
            Wr, Wi1, br = params["W_r"], params["W_i"], params["b_r"]
            wo, bo = params["W_o"], float(params["bias"])
        _, xv = kern.ernn_seq(Wr, Wi1, br, wo, bo, utr, np.zeros(H))
        yv, _ = kern.ernn_seq(Wr, Wi1, br, wo, bo, uva, xv)
        vn = float(np.sqrt(np.mean((yv - dva) ** 2) / dvv))
        if not np.isfinite(vn) or vn > 1e3:
            raise TrainingDivergence(f"validation NRMSE {vn} at epoch {epoch}")
        curve.append([epoch, epoch_loss / nwin, vn])
        epochs_run = epoch
        if vn < best[0] - 1e-6:
            best = (vn, (Wr.copy(), Wi1.copy(), br.copy(), wo.copy(), bo))
            bad = 0
        else:
            bad += 1
            if bad >= cfg.patience:
                break
    Wr, Wi1, br, wo, bo = best[1]
    w = ErnnWeights(W_r=Wr, W_i=Wi1.reshape(-1, 1), b_r=br)
    readout = Readout(W_o=wo, bias=bo)
    result = TrainResult(val_nrmse=best[0], epochs_run=epochs_run, curve=curve)
    return w, readout, result


def predict_tornn(weights: NetworkWeights, gammas: GammaParams,
                  readout: Readout, ds: SupervisedDataset, which: str = "test"):
    """Warm the state over everything before the range, then predict it."""
    rng_map = {"train": ds.train_range, "val": ds.val_range,
               "test": ds.test_range}
    r = rng_map[which]
    H = weights.H
    g1n = gammas.gamma1[weights.group]
    g2n = gammas.gamma2[weights.group]
    Wi = np.ascontiguousarray(weights.W_i[:, 0])
    _, xp, xpp = kern.tornn_seq(weights.W_r, Wi, g1n, g2n,
                                readout.W_o, readout.bias,
                                ds.inputs[:r.start], np.zeros(H), np.zeros(H))
    preds, _, _ = kern.tornn_seq(weights.W_r, Wi, g1n, g2n,
                                 readout.W_o, readout.bias,
                                 ds.inputs[r.start:r.stop], xp, xpp)
    truth = ds.targets[r.start:r.stop]
    return nrmse(preds, truth), preds, truth


def predict_ernn(w: ErnnWeights, readout: Readout, ds: SupervisedDataset,
                 which: str = "test"):
    rng_map = {"train": ds.train_range, "val": ds.val_range,
               "test": ds.test_range}
    r = rng_map[which]
    H = w.W_r.shape[0]
    Wi1 = np.ascontiguousarray(w.W_i[:, 0])
    _, x = kern.ernn_seq(w.W_r, Wi1, w.b_r, readout.W_o, readout.bias,
                         ds.inputs[:r.start], np.zeros(H))
    preds, _ = kern.ernn_seq(w.W_r, Wi1, w.b_r, readout.W_o, readout.bias,
                             ds.inputs[r.start:r.stop], x)
    truth = ds.targets[r.start:r.stop]
    return nrmse(preds, truth), preds, truth


def finite_difference_check(kind: str, seed: int = 0, step: float = 1e-6,
                            K: int = 2, N: int = 3, window: int = 5) -> float:
    """Max relative error between analytic and central-difference gradients
    on a small random instance. The oracle differentiates the same loss
    the kernels report, parameter by parameter.
    """
    from .topology import build_topology
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(window)
    d = rng.standard_normal(window)
    lam = 1e-5
    if kind == "tornn":
        weights = build_topology(K, N, 0.6, 0.3, 0.8, seed)
        H = weights.H
        th1 = rng.normal(0, 1, K)
        th2 = rng.normal(0, 1, K)
        wo = rng.standard_normal(H) * 0.5
        bo = float(rng.normal())
        xp0 = rng.standard_normal(H) * 0.4
        xpp0 = rng.standard_normal(H) * 0.4

        def f(t1, t2, w, b):
            gam = GammaParams(theta1=t1, theta2=t2)
            bun, _, _ = tbptt_gradients(weights, gam, Readout(W_o=w, bias=b),
                                        u, d, xp0, xpp0, lam)
            return bun.loss

        gam = GammaParams(theta1=th1, theta2=th2)
        bundle, _, _ = tbptt_gradients(weights, gam, Readout(W_o=wo, bias=bo),
                                       u, d, xp0, xpp0, lam)
        flat_analytic = np.concatenate([bundle.d_theta1, bundle.d_theta2,
                                        bundle.d_W_o, [bundle.d_bias]])
        numeric = []
        for i in range(K):
            e = np.zeros(K); e[i] = step
            numeric.append((f(th1 + e, th2, wo, bo) - f(th1 - e, th2, wo, bo)) / (2 * step))
        for i in range(K):
            e = np.zeros(K); e[i] = step
            numeric.append((f(th1, th2 + e, wo, bo) - f(th1, th2 - e, wo, bo)) / (2 * step))
        for i in range(H):
            e = np.zeros(H); e[i] = step
            numeric.append((f(th1, th2, wo + e, bo) - f(th1, th2, wo - e, bo)) / (2 * step))
        numeric.append((f(th1, th2, wo, bo + step) - f(th1, th2, wo, bo - step)) / (2 * step))
    elif kind == "ernn":
        H = K * N
        Wr = rng.standard_normal((H, H)) * 0.4
        Wi = rng.standard_normal((H, 1)) * 0.5
        br = rng.standard_normal(H) * 0.1
        wo = rng.standard_normal(H) * 0.5
        bo = float(rng.normal())
        x0 = rng.standard_normal(H) * 0.4

        def f(Wr_, Wi_, br_, w_, b_):
            bun, _ = ernn_gradients(ErnnWeights(W_r=Wr_, W_i=Wi_, b_r=br_),
                                    Readout(W_o=w_, bias=b_), u, d, x0, lam)
            return bun.loss

        bundle, _ = ernn_gradients(ErnnWeights(W_r=Wr, W_i=Wi, b_r=br),
                                   Readout(W_o=wo, bias=bo), u, d, x0, lam)
        flat_analytic = np.concatenate([bundle.d_W_r.ravel(),
                                        bundle.d_W_i.ravel(), bundle.d_b_r,
                                        bundle.d_W_o, [bundle.d_bias]])
        numeric = []
        for i in range(H * H):
            E = np.zeros((H, H)); E.flat[i] = step
            numeric.append((f(Wr + E, Wi, br, wo, bo) - f(Wr - E, Wi, br, wo, bo)) / (2 * step))
        for i in range(H):
            E = np.zeros((H, 1)); E[i, 0] = step
            numeric.append((f(Wr, Wi + E, br, wo, bo) - f(Wr, Wi - E, br, wo, bo)) / (2 * step))
        for i in range(H):
            e = np.zeros(H); e[i] = step
            numeric.append((f(Wr, Wi, br + e, wo, bo) - f(Wr, Wi, br - e, wo, bo)) / (2 * step))
        for i in range(H):
            e = np.zeros(H); e[i] = step
            numeric.append((f(Wr, Wi, br, wo + e, bo) - f(Wr, Wi, br, wo - e, bo)) / (2 * step))
        numeric.append((f(Wr, Wi, br, wo, bo + step) - f(Wr, Wi, br, wo, bo - step)) / (2 * step))
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    numeric = np.asarray(numeric)
    denom = np.maximum(np.maximum(np.abs(flat_analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(flat_analytic - numeric) / denom))
