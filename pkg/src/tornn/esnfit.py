"""Leaky-ESN baseline: state harvesting, ridge readout, GA hyperparameter search.

The reservoir never trains; a ridge regression maps harvested states to
(teacher-scaled) targets. During harvesting the output-feedback path is
teacher forced with the scaled true targets; at prediction time the model
feeds back its own scaled output, since true values are unavailable at a
multi-step horizon. Hyperparameters are searched by a real-coded genetic
algorithm inside fixed box bounds.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .timeseries import SupervisedDataset, nrmse
from .topology import rescale_spectral_radius

# Admissible hyperparameter ranges for the search.
BOUNDS = {
    "rho": (0.1, 1.5),
    "connectivity": (0.1, 0.5),
    "xi": (0.0, 0.1),
    "omega_i": (0.1, 1.0),
    "omega_o": (0.1, 1.0),
    "omega_f": (0.1, 1.0),
    "lam": (0.0, 0.5),
}
_GENE_ORDER = tuple(BOUNDS)


@dataclass(frozen=True)
class EsnHyperparams:
    rho: float = 0.95
    connectivity: float = 0.3
    xi: float = 0.0
    omega_i: float = 0.5
    omega_o: float = 0.5
    omega_f: float = 0.1
    lam: float = 0.25

    def __post_init__(self):
        for name, (lo, hi) in BOUNDS.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, g) for g in _GENE_ORDER])

    @staticmethod
    def from_vector(vec) -> "EsnHyperparams":
        return EsnHyperparams(**dict(zip(_GENE_ORDER, map(float, vec))))


@dataclass
class GaConfig:
    population: int = 20
    generations: int = 30
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_std: float = 0.1   # fraction of each bound's range
    elitism: int = 2
    seed: int = 0
    reservoir_seeds: int = 3    # fitness averages over this many reservoirs

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        for r in (self.crossover_rate, self.mutation_rate):
            if not 0 <= r <= 1:
                raise ValueError("rates must be in [0, 1]")


@dataclass
class EsnReservoir:
    W_r: np.ndarray
    W_i: np.ndarray   # (N_r,)
    W_f: np.ndarray   # (N_r,) uniform in [-1, 1]
    seed: int


def build_esn(hp: EsnHyperparams, n_reservoir: int, seed: int) -> EsnReservoir:
    """Bernoulli(connectivity)-masked standard normal matrix rescaled to rho."""
    s_mask, s_rec, s_in, s_fb = np.random.SeedSequence(seed).generate_state(4)
    mask = (np.random.default_rng(s_mask).random((n_reservoir, n_reservoir))
            < hp.connectivity)
    W = np.where(mask,
                 np.random.default_rng(s_rec).standard_normal((n_reservoir,
                                                               n_reservoir)),
                 0.0)
    W_r = rescale_spectral_radius(W, hp.rho)
    W_i = np.random.default_rng(s_in).standard_normal(n_reservoir)
    W_f = np.random.default_rng(s_fb).uniform(-1.0, 1.0, n_reservoir)
    return EsnReservoir(W_r=W_r, W_i=W_i, W_f=W_f, seed=seed)


def harvest_states(esn: EsnReservoir, hp: EsnHyperparams, inputs, targets,
                   washout: int, gamma: float = 1.0,
                   noise_seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Teacher-forced state collection.

    The feedback entering the update at time t is the scaled true target
    of the previous step (omega_o * targets[t-1], zero at t=0). Returns
    (state rows after washout with a trailing constant-1 bias column,
    final reservoir state).
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    n = len(inputs)
    if washout >= n:
        raise ValueError(f"washout {washout} consumes the whole sequence ({n})")
    y_fb = np.zeros(n)
    y_fb[1:] = hp.omega_o * targets[:-1]
    H = len(esn.W_i)
    noise = (np.random.default_rng(noise_seed).standard_normal((n, H))
             if hp.xi > 0 else np.zeros((n, H)))
    S, x_end = kern.esn_states(esn.W_r, esn.W_i, esn.W_f, gamma,
                               hp.omega_i, hp.omega_f, hp.xi,
                               inputs, y_fb, noise, np.zeros(H))
    rows = S[washout:]
    return np.hstack([rows, np.ones((len(rows), 1))]), x_end


def ridge_readout(states: np.ndarray, targets, lam: float) -> np.ndarray:
    """W = (S^T S + lam I)^{-1} S^T y via a QR least-squares factorization.

    Solved as the augmented system [S; sqrt(lam) I] w ~ [y; 0], which is
    numerically stabler than forming normal equations. The bias column's
    weight is penalized like any other (by design; documented behavior).
    """
    states = np.asarray(states, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if states.ndim != 2 or len(states) < 1:
        raise ValueError("states must be a nonempty 2-D matrix")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    m = states.shape[1]
    if lam == 0:
        if np.linalg.matrix_rank(states) < m:
            raise np.linalg.LinAlgError(
                "singular system at lambda=0; use lambda > 0")
        w, *_ = np.linalg.lstsq(states, targets, rcond=None)
        return w
    A = np.vstack([states, np.sqrt(lam) * np.eye(m)])
    y = np.concatenate([targets, np.zeros(m)])
    w, *_ = np.linalg.lstsq(A, y, rcond=None)
    return w


@dataclass
class FittedEsn:
    reservoir: EsnReservoir
    hp: EsnHyperparams
    readout: np.ndarray   # (N_r + 1,) includes bias weight
    gamma: float


def fit_esn(hp: EsnHyperparams, ds: SupervisedDataset, n_reservoir: int,
            seed: int, gamma: float = 1.0) -> FittedEsn:
    """Harvest the training range and ridge-fit the scaled-target readout."""
    esn = build_esn(hp, n_reservoir, seed)
    tr = ds.train_range
    S, _ = harvest_states(esn, hp, ds.inputs[tr.start:tr.stop],
                          ds.targets[tr.start:tr.stop], ds.washout,
                          gamma=gamma, noise_seed=seed)
    y = hp.omega_o * ds.targets[tr.start + ds.washout:tr.stop]
    w = ridge_readout(S, y, hp.lam)
    return FittedEsn(reservoir=esn, hp=hp, readout=w, gamma=gamma)


def predict_esn(fit: FittedEsn, ds: SupervisedDataset, which: str = "test"):
    """Teacher-forced warmup over everything before the range, then
    free-running prediction with own-output feedback inside it."""
    r = {"train": ds.train_range, "val": ds.val_range,
         "test": ds.test_range}[which]
    hp = fit.hp
    esn = fit.reservoir
    H = len(esn.W_i)
    n_warm = r.start
    rng_noise = np.random.default_rng(esn.seed + 1)
    y_fb = np.zeros(n_warm)
    y_fb[1:] = hp.omega_o * ds.targets[:n_warm - 1]
    noise_w = (rng_noise.standard_normal((n_warm, H)) if hp.xi > 0
               else np.zeros((n_warm, H)))
    _, x = kern.esn_states(esn.W_r, esn.W_i, esn.W_f, fit.gamma,
                           hp.omega_i, hp.omega_f, hp.xi,
                           ds.inputs[:n_warm], y_fb, noise_w, np.zeros(H))
    y0 = hp.omega_o * ds.targets[n_warm - 1] if n_warm > 0 else 0.0
    n_pred = r.stop - r.start
    noise_p = (rng_noise.standard_normal((n_pred, H)) if hp.xi > 0
               else np.zeros((n_pred, H)))
    w, b = fit.readout[:H], fit.readout[H]
    ys, _ = kern.esn_predict(esn.W_r, esn.W_i, esn.W_f, fit.gamma,
                             hp.omega_i, hp.omega_f, hp.xi,
                             ds.inputs[r.start:r.stop], noise_p, x, w, b, y0)
    preds = ys / hp.omega_o
    truth = ds.targets[r.start:r.stop]
    return nrmse(preds, truth), preds, truth


def esn_trial_nrmse(hp: EsnHyperparams, ds: SupervisedDataset,
                    n_reservoir: int, seed: int,
                    which: str = "val") -> float:
    fit = fit_esn(hp, ds, n_reservoir, seed)
    return predict_esn(fit, ds, which)[0]


def ga_search(ds: SupervisedDataset, n_reservoir: int,
              cfg: GaConfig) -> tuple[EsnHyperparams, list]:
    """Box-constrained GA over the hyperparameter bounds.

    Fitness of a candidate is its validation NRMSE averaged over
    `reservoir_seeds` independent reservoirs; failed evaluations score
    worst instead of aborting. Returns the best individual ever evaluated
    and per-generation rows [generation, best_ever, mean_of_generation].
    """
    rng = np.random.default_rng(cfg.seed)
    lo = np.array([BOUNDS[g][0] for g in _GENE_ORDER])
    hi = np.array([BOUNDS[g][1] for g in _GENE_ORDER])
    span = hi - lo

    def evaluate(vec) -> float:
        try:
            hp = EsnHyperparams.from_vector(vec)
            vals = [esn_trial_nrmse(hp, ds, n_reservoir, s)
                    for s in range(cfg.seed, cfg.seed + cfg.reservoir_seeds)]
            fit = float(np.mean(vals))
            return fit if np.isfinite(fit) else np.inf
        except (np.linalg.LinAlgError, ValueError, FloatingPointError):
            return np.inf

    pop = lo + rng.random((cfg.population, len(lo))) * span
    fitness = np.array([evaluate(v) for v in pop])
    best_idx = int(np.argmin(fitness))
    best_vec = pop[best_idx].copy()
    best_fit = float(fitness[best_idx])
    finite = fitness[np.isfinite(fitness)]
    history = [[0, best_fit, float(np.mean(finite)) if len(finite) else np.inf]]

    def tournament() -> np.ndarray:
        idx = rng.integers(0, cfg.population, 3)
        return pop[idx[np.argmin(fitness[idx])]]

    for gen in range(1, cfg.generations + 1):
        elite_order = np.argsort(fitness)[:cfg.elitism]
        children = [pop[i].copy() for i in elite_order]
        while len(children) < cfg.population:
            p1, p2 = tournament(), tournament()
            if rng.random() < cfg.crossover_rate:
                pick = rng.random(len(lo)) < 0.5
                child = np.where(pick, p1, p2)
            else:
                child = p1.copy()
            mutate = rng.random(len(lo)) < cfg.mutation_rate
            child = child + mutate * rng.normal(0, cfg.mutation_std * span)
            children.append(np.clip(child, lo, hi))
        pop = np.array(children)
        fitness = np.array([evaluate(v) for v in pop])
        gen_best = int(np.argmin(fitness))
        if fitness[gen_best] < best_fit:
            best_fit = float(fitness[gen_best])
            best_vec = pop[gen_best].copy()
        finite = fitness[np.isfinite(fitness)]
        history.append([gen, best_fit,
                        float(np.mean(finite)) if len(finite) else np.inf])
    return EsnHyperparams.from_vector(best_vec), history


def ga_history_to_csv(history, path) -> None:
    np.savetxt(path, np.asarray(history, dtype=float), delimiter=",",
               header="generation,best_nrmse,mean_nrmse", comments="",
               fmt="%.10g")
