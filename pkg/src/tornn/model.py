"""Forward dynamics for the three architectures.

Bandpass cell (per neuron n in group k), the core update:

    x'[t+1] = tanh((1 - g1_k) x'[t] + g1_k (W_r x[t])_n + (W_i u[t+1])_n)
    x''[t+1] = (1 - g2_k) x''[t] + g2_k x'[t+1]
    x[t+1]  = x'[t+1] - x''[t+1]

x' is a leaky lowpass of the driven activation, x'' a slower lowpass of
x', and their difference passes a band whose two cutoffs are set by the
group's (g1, g2) pair. Note the input term enters at full scale; only the
recurrent term is multiplied by g1. Each g is the sigmoid of an
unconstrained trainable parameter, so it stays strictly inside (0, 1).

The leaky-ESN cell and the fully trainable ERNN cell used as baselines
live here too, sharing the same readout convention.
"""

from dataclasses import dataclass, field

import numpy as np

from .topology import NetworkWeights, weights_from_json, weights_to_json


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class GammaParams:
    """Per-group pre-sigmoid cutoff parameters (the trainable timescales)."""

    theta1: np.ndarray  # (K,)
    theta2: np.ndarray  # (K,)

    @property
    def gamma1(self) -> np.ndarray:
        return sigmoid(self.theta1)

    @property
    def gamma2(self) -> np.ndarray:
        return sigmoid(self.theta2)

    @staticmethod
    def from_gammas(g1, g2) -> "GammaParams":
        g1 = np.asarray(g1, dtype=float)
        g2 = np.asarray(g2, dtype=float)
        if np.any((g1 <= 0) | (g1 >= 1) | (g2 <= 0) | (g2 >= 1)):
            raise ValueError("gammas must lie strictly in (0, 1)")
        return GammaParams(theta1=np.log(g1 / (1 - g1)),
                           theta2=np.log(g2 / (1 - g2)))


@dataclass
class ModelState:
    x_prime: np.ndarray
    x_second: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.x_prime - self.x_second

    @staticmethod
    def zeros(H: int) -> "ModelState":
        return ModelState(x_prime=np.zeros(H), x_second=np.zeros(H))


@dataclass
class Readout:
    """Affine readout y = W_o x + bias with identity output activation."""

    W_o: np.ndarray          # (H,) single-output weights
    bias: float = 0.0


def tornn_step(state: ModelState, u, weights: NetworkWeights,
               gammas: GammaParams):
    """One bandpass update; returns the new ModelState. Outputs come from
    readout_apply / run_sequence, which fold the affine readout over x."""
    g1 = gammas.gamma1[weights.group]
    g2 = gammas.gamma2[weights.group]
    x = state.x
    drive = weights.W_r @ x
    inp = weights.W_i @ np.atleast_1d(np.asarray(u, dtype=float))
    x_prime = np.tanh((1 - g1) * state.x_prime + g1 * drive + inp)
    x_second = (1 - g2) * state.x_second + g2 * x_prime
    if not np.all(np.isfinite(x_prime)):
        raise FloatingPointError("non-finite state in bandpass update")
    return ModelState(x_prime=x_prime, x_second=x_second)


def esn_step(x, u, W_r, W_i, gamma: float, omega_i: float,
             omega_f: float = 0.0, W_f=None, y_prev: float = 0.0,
             xi: float = 0.0, rng: np.random.Generator | None = None):
    """Leaky-integrator reservoir update with optional output feedback.

    x_new = tanh((1-gamma) x + gamma W_r x + omega_i W_i u
                 + omega_f W_f y_prev) + xi * noise
    """
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    if xi < 0:
        raise ValueError(f"xi must be >= 0, got {xi}")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    pre = (1 - gamma) * x + gamma * (W_r @ x) + omega_i * (W_i @ u)
    if omega_f != 0.0:
        pre = pre + omega_f * W_f * y_prev
    x_new = np.tanh(pre)
    if xi > 0:
        x_new = x_new + xi * rng.standard_normal(len(x))
    return x_new


@dataclass
class ErnnWeights:
    """Dense fully trainable recurrent cell: x_new = tanh(W_r x + W_i u + b_r)."""

    W_r: np.ndarray   # (H, H)
    W_i: np.ndarray   # (H, I)
    b_r: np.ndarray   # (H,)


def ernn_step(x, u, w: ErnnWeights):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return np.tanh(w.W_r @ x + w.W_i @ u + w.b_r)


def readout_apply(readout: Readout, x) -> float:
    return float(readout.W_o @ x + readout.bias)


def run_sequence(weights: NetworkWeights, gammas: GammaParams,
                 readout: Readout, inputs,
                 initial: ModelState | None = None):
    """Fold tornn_step over a scalar input sequence.

    Returns (states trajectory (T, H) of exposed x, outputs (T,),
    final ModelState). Zero initial state by default.
    """
    inputs = np.asarray(inputs, dtype=float)
    H = weights.H
    state = initial if initial is not None else ModelState.zeros(H)
    T = len(inputs)
    states = np.empty((T, H))
    outputs = np.empty(T)
    for t in range(T):
        try:
            state = tornn_step(state, inputs[t], weights, gammas)
        except FloatingPointError as exc:
            raise FloatingPointError(f"{exc} at time index {t}") from None
        states[t] = state.x
        outputs[t] = readout_apply(readout, state.x)
    return states, outputs, state


def count_trainable_params(K: int, N: int = 20, out_dim: int = 1) -> int:
    """Bandpass network budget: 2 thetas per group + readout weights + bias."""
    return 2 * K + K * N * out_dim + out_dim


def count_ernn_params(H: int, input_dim: int = 1, out_dim: int = 1) -> int:
    """Everything trains: H^2 + H*I + b_r + readout weights + readout bias."""
    return H * H + H * input_dim + H + H * out_dim + out_dim


def checkpoint_to_json(weights: NetworkWeights, gammas: GammaParams,
                       readout: Readout) -> dict:
    return {
        "topology": weights_to_json(weights),
        "theta1": gammas.theta1.tolist(),
        "theta2": gammas.theta2.tolist(),
        "W_o": readout.W_o.tolist(),
        "bias": readout.bias,
    }


def checkpoint_from_json(doc: dict):
    weights = weights_from_json(doc["topology"])
    gammas = GammaParams(theta1=np.array(doc["theta1"]),
                         theta2=np.array(doc["theta2"]))
    readout = Readout(W_o=np.array(doc["W_o"]), bias=float(doc["bias"]))
    return weights, gammas, readout
