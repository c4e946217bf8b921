"""Benchmark signal generation, spectral tooling, and the NRMSE metric.

The task family is a sum of K sinusoids whose angular frequencies are
e^k * phi for k = 1..K. Frequencies are pairwise incommensurable because
powers of e are irrational multiples of each other, which makes the
signal aperiodic and forces a predictor to resolve every component.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly sampled scalar sequence plus generation metadata."""

    values: np.ndarray
    K: int
    phi: float
    noise_ratio: float = 0.0
    seed: int | None = None

    @property
    def T(self) -> int:
        return len(self.values)

    def component_frequencies(self) -> np.ndarray:
        """Angular frequencies (radians/step) of the K components."""
        return np.e ** np.arange(1, self.K + 1) * self.phi


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray  # cycles/step, in [0, 0.5], strictly increasing
    power: np.ndarray
    segment_len: int
    overlap: float


@dataclass(frozen=True)
class SupervisedDataset:
    """Aligned input/target pairs with chronological split boundaries.

    targets[t] = source[t + horizon]. The three ranges are contiguous and
    ordered train < validation < test. The first `washout` indices of the
    train range are excluded from loss/metric accumulation; models still
    run their state over them to warm up.
    """

    inputs: np.ndarray
    targets: np.ndarray
    horizon: int
    washout: int
    train_range: range
    val_range: range
    test_range: range
    meta: dict = field(default_factory=dict)


def gen_mso(K: int, phi: float, T: int) -> TimeSeries:
    """Sum of K sinusoids: values[t] = sum_k sin(e^k * phi * t).

    Rejects (K, phi) whose fastest component exceeds the Nyquist rate.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if phi <= 0:
        raise ValueError(f"phi must be > 0, got {phi}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    w_max = np.e ** K * phi
    if w_max >= np.pi:
        raise ValueError(
            f"component frequency e^{K}*phi = {w_max:.6f} rad/step exceeds "
            f"the Nyquist limit pi; reduce K or phi"
        )
    t = np.arange(T, dtype=np.float64)
    values = np.zeros(T)
    for k in range(1, K + 1):
        values += np.sin(np.e ** k * phi * t)
    return TimeSeries(values=values, K=K, phi=phi)


def add_noise(ts: TimeSeries, noise_ratio: float, seed: int) -> TimeSeries:
    """Additive white Gaussian noise scaled to the given noise-to-signal ratio.

    The noise stddev is noise_ratio * stddev(ts.values), so the printed
    ratio is met exactly in expectation regardless of signal amplitude.
    """
    if noise_ratio < 0:
        raise ValueError(f"noise_ratio must be >= 0, got {noise_ratio}")
    if ts.noise_ratio != 0:
        raise ValueError("add_noise expects a noiseless input series")
    if noise_ratio == 0:
        return TimeSeries(values=ts.values.copy(), K=ts.K, phi=ts.phi,
                          noise_ratio=0.0, seed=seed)
    rng = np.random.default_rng(seed)
    sigma = noise_ratio * np.std(ts.values)
    noisy = ts.values + sigma * rng.standard_normal(ts.T)
    return TimeSeries(values=noisy, K=ts.K, phi=ts.phi,
                      noise_ratio=noise_ratio, seed=seed)


def psd_estimate(ts, segment_len: int = 1024, overlap: float = 0.5) -> Spectrum:
    """Welch-averaged periodogram with a Hann window.

    Power is normalized so a unit-amplitude on-bin sinusoid yields peak
    power 1.0: each segment periodogram is divided by (sum(window)/2)^2,
    the coherent gain of a half-amplitude complex exponential.
    """
    values = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=float)
    n = len(values)
    if segment_len > n:
        raise ValueError(f"segment_len {segment_len} exceeds series length {n}")
    if segment_len & (segment_len - 1):
        raise ValueError(f"segment_len must be a power of two, got {segment_len}")
    if not 0 <= overlap < 1:
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    window = np.hanning(segment_len)
    hop = max(1, int(round(segment_len * (1 - overlap))))
    scale = (window.sum() / 2.0) ** 2
    segments = []
    for start in range(0, n - segment_len + 1, hop):
        seg = values[start:start + segment_len] * window
        segments.append(np.abs(np.fft.rfft(seg)) ** 2 / scale)
    power = np.mean(segments, axis=0)
    freqs = np.fft.rfftfreq(segment_len)
    return Spectrum(frequencies=freqs, power=power,
                    segment_len=segment_len, overlap=overlap)


def count_spectral_peaks(sp: Spectrum, prominence: float = 0.05) -> int:
    """Number of local maxima with prominence above `prominence * max(power)`.

    This count is the recommended number of neuron groups for a network
    built against the analyzed signal.
    """
    if len(sp.power) == 0:
        raise ValueError("empty spectrum")
    if not 0 < prominence < 1:
        raise ValueError(f"prominence must be in (0, 1), got {prominence}")
    return len(peak_frequencies(sp, prominence))


def peak_frequencies(sp: Spectrum, prominence: float = 0.05) -> np.ndarray:
    """Frequencies (cycles/step) of the detected peaks, ascending."""
    pmax = sp.power.max()
    if pmax <= 0:
        return np.empty(0)
    idx, _ = find_peaks(sp.power, prominence=prominence * pmax)
    return sp.frequencies[idx]


def nrmse(pred, truth) -> float:
    """RMSE normalized by the ground-truth standard deviation.

    sqrt(mean((pred - truth)^2) / mean((truth - mean(truth))^2)). The
    denominator uses the variance of the truth, so the constant-mean
    predictor scores exactly 1.
    """
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError(f"shape mismatch or empty: {pred.shape} vs {truth.shape}")
    denom = np.mean((truth - truth.mean()) ** 2)
    if denom == 0:
        raise ValueError("truth is constant; NRMSE denominator undefined")
    return float(np.sqrt(np.mean((pred - truth) ** 2) / denom))


def make_supervised(ts: TimeSeries, horizon: int = 15, washout: int = 100,
                    split=(0.6, 0.2, 0.2)) -> SupervisedDataset:
    """Build an h-step-ahead prediction dataset with a chronological split."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if abs(sum(split) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {split}")
    if ts.T <= horizon + washout:
        raise ValueError(f"series length {ts.T} too short for horizon "
                         f"{horizon} plus washout {washout}")
    values = ts.values
    inputs = values[:-horizon]
    targets = values[horizon:]
    n = len(inputs)
    n_train = int(round(split[0] * n))
    n_val = int(round(split[1] * n))
    return SupervisedDataset(
        inputs=inputs, targets=targets, horizon=horizon, washout=washout,
        train_range=range(0, n_train),
        val_range=range(n_train, n_train + n_val),
        test_range=range(n_train + n_val, n),
        meta={"K": ts.K, "phi": ts.phi, "noise_ratio": ts.noise_ratio,
              "seed": ts.seed},
    )


def series_to_csv(ts: TimeSeries, path) -> None:
    rows = np.column_stack([np.arange(ts.T), ts.values])
    np.savetxt(path, rows, delimiter=",", header="t,value", comments="",
               fmt=["%d", "%.17g"])


def series_from_csv(path, K: int = 0, phi: float = 0.0) -> TimeSeries:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return TimeSeries(values=np.atleast_2d(data)[:, 1].copy(), K=K, phi=phi)


def spectrum_to_csv(sp: Spectrum, path) -> None:
    rows = np.column_stack([sp.frequencies, sp.power])
    np.savetxt(path, rows, delimiter=",", header="freq,power", comments="",
               fmt="%.17g")
