"""Fixed random network construction.

The recurrent layer is partitioned into K groups of N neurons. Connection
probability is p inside a group and q between groups, with p >= q so that
groups are internally dense and externally sparse. Nonzero links get
standard normal weights and the whole matrix is rescaled to a target
spectral radius below 1 for stability. None of these weights is ever
trained.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NetworkWeights:
    """Immutable fixed weights plus the group index of every neuron."""

    W_r: np.ndarray      # (H, H) recurrent matrix, H = N*K
    W_i: np.ndarray      # (H, I) input matrix
    group: np.ndarray    # (H,) group id of each neuron, values in 0..K-1
    K: int
    N: int
    p: float
    q: float
    rho: float
    seed: int

    @property
    def H(self) -> int:
        return self.W_r.shape[0]


def block_mask(K: int, N: int, p: float, q: float,
               rng: np.random.Generator) -> np.ndarray:
    """Boolean (NK x NK) connectivity: Bernoulli(p) intra, Bernoulli(q) inter.

    The diagonal is included under the intra-group probability.
    """
    if not (0 <= q <= p <= 1):
        raise ValueError(f"need 0 <= q <= p <= 1, got p={p}, q={q}")
    if K < 1 or N < 1:
        raise ValueError(f"K and N must be >= 1, got K={K}, N={N}")
    group = np.repeat(np.arange(K), N)
    same = group[:, None] == group[None, :]
    prob = np.where(same, p, q)
    return rng.random((K * N, K * N)) < prob


def assign_weights(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Standard normal weights on the mask's nonzero entries, zero elsewhere."""
    dense = rng.standard_normal(mask.shape)
    return np.where(mask, dense, 0.0)


def spectral_radius(W: np.ndarray, tol: float = 1e-12,
                    max_iter: int = 20000) -> float:
    """Largest eigenvalue modulus via two-dimensional subspace iteration.

    A single power-iteration vector stalls when the dominant eigenvalues
    are a complex conjugate pair; iterating an orthonormal 2-column block
    and reading the eigenvalues of the projected 2x2 matrix handles both
    the real and the complex-pair case.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"square matrix required, got shape {W.shape}")
    n = W.shape[0]
    if n == 1:
        return float(abs(W[0, 0]))
    rng = np.random.default_rng(0)  # fixed probe; result is deterministic
    Q = np.linalg.qr(rng.standard_normal((n, 2)))[0]
    prev = -1.0
    for _ in range(max_iter):
        Z = W @ Q
        norm = np.linalg.norm(Z)
        if norm < 1e-300:
            return 0.0
        Q, R = np.linalg.qr(Z)
        small = Q.T @ W @ Q
        est = float(np.max(np.abs(np.linalg.eigvals(small))))
        if abs(est - prev) <= tol * max(est, 1.0):
            return est
        prev = est
    return prev


def rescale_spectral_radius(W: np.ndarray, rho: float) -> np.ndarray:
    """Scale W so its spectral radius equals rho exactly."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    sr = spectral_radius(W)
    if sr == 0:
        raise ValueError("matrix has zero spectral radius; cannot rescale")
    return W * (rho / sr)


def input_weights(total_neurons: int, input_dim: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Dense (total_neurons x input_dim) standard normal input matrix."""
    return rng.standard_normal((total_neurons, input_dim))


def build_topology(K: int, N: int = 20, p: float = 0.4, q: float = 0.1,
                   rho: float = 0.95, seed: int = 0,
                   input_dim: int = 1) -> NetworkWeights:
    """Construct the full fixed-weight set from one integer seed.

    Three independent child streams (mask, recurrent weights, input
    weights) are derived from the seed, so any one piece is reproducible
    without replaying the others.
    """
    s_mask, s_rec, s_in = np.random.SeedSequence(seed).generate_state(3)
    mask = block_mask(K, N, p, q, np.random.default_rng(s_mask))
    W = assign_weights(mask, np.random.default_rng(s_rec))
    W_r = rescale_spectral_radius(W, rho)
    W_i = input_weights(K * N, input_dim, np.random.default_rng(s_in))
    group = np.repeat(np.arange(K), N)
    return NetworkWeights(W_r=W_r, W_i=W_i, group=group,
                          K=K, N=N, p=p, q=q, rho=rho, seed=seed)


def weights_to_json(w: NetworkWeights) -> dict:
    """Serializable document; round-trips bit-exactly via weights_from_json."""
    return {
        "W_r": {"shape": list(w.W_r.shape), "values": w.W_r.ravel().tolist()},
        "W_i": {"shape": list(w.W_i.shape), "values": w.W_i.ravel().tolist()},
        "group": w.group.tolist(),
        "config": {"K": w.K, "N": w.N, "p": w.p, "q": w.q,
                   "rho": w.rho, "seed": w.seed},
    }


def weights_from_json(doc: dict) -> NetworkWeights:
    cfg = doc["config"]
    W_r = np.array(doc["W_r"]["values"]).reshape(doc["W_r"]["shape"])
    W_i = np.array(doc["W_i"]["values"]).reshape(doc["W_i"]["shape"])
    return NetworkWeights(W_r=W_r, W_i=W_i,
                          group=np.array(doc["group"], dtype=int), **cfg)
