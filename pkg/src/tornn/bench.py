"""Benchmark orchestration and the command-line interface.

One experiment = one task signal shared by every model and trial, a model
list, and a trial count. Trial seeds are base_seed + trial index. The
group count for grouped/reservoir models comes from the spectral peak
count of the task signal unless overridden.

Subcommands:
    gen        emit a task series as CSV
    spectrum   emit the Welch PSD as CSV and print the peak count
    train      single model, single trial; prints NRMSE, saves artifacts
    bench      full multi-trial experiment; writes records + summary
    summarize  rebuild the summary CSV from a records.json
"""

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .esnfit import (EsnHyperparams, GaConfig, esn_trial_nrmse, fit_esn,
                     ga_history_to_csv, ga_search, predict_esn)
from .model import GammaParams, Readout, sigmoid
from .timeseries import (TimeSeries, add_noise, count_spectral_peaks,
                         gen_mso, make_supervised, psd_estimate,
                         series_to_csv, spectrum_to_csv)
from .topology import build_topology
from .training import (TrainConfig, TrainingDivergence, curve_to_csv,
                       predict_ernn, predict_tornn, train_ernn, train_tornn)

TASKS = {"x2": 2, "x3": 3, "x5": 5, "x7": 7}
DEFAULT_PHI = 0.0025
DEFAULT_T = 5000
DEFAULT_HORIZON = 15
DEFAULT_NOISE_RATIO = 0.2
ERNN_UNITS = 91


@dataclass
class ExperimentConfig:
    task: str = "x2"
    noise: bool = False
    phi: float = DEFAULT_PHI
    T: int = DEFAULT_T
    horizon: int = DEFAULT_HORIZON
    noise_ratio: float = DEFAULT_NOISE_RATIO
    models: list = field(default_factory=lambda: ["tornn", "ernn", "esn"])
    trials: int = 10
    base_seed: int = 0
    groups: int | None = None          # override the spectral-peak count
    washout: int = 100
    split: tuple = (0.6, 0.2, 0.2)
    jobs: int = 1
    out_dir: str = "results"
    # per-network hyperparameters (shipped benchmark defaults)
    tornn: dict = field(default_factory=lambda: {
        "N": 20, "p": 0.4, "q": 0.1, "rho": 0.95, "lam": 1e-5,
        "tau_tnc": 10, "learning_rate": 1e-3, "max_epochs": 2000,
        "patience": 50, "init_candidates": 24})
    ernn: dict = field(default_factory=lambda: {
        "N_r": ERNN_UNITS, "lam": 1e-5, "tau_tnc": 10,
        "learning_rate": 1e-3, "max_epochs": 2000, "patience": 50})
    esn: dict = field(default_factory=lambda: {
        "population": 20, "generations": 30, "reservoir_seeds": 3})

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; pick from {list(TASKS)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        bad = [m for m in self.models if m not in ("tornn", "ernn", "esn")]
        if bad:
            raise ValueError(f"unknown model kinds: {bad}")

    @staticmethod
    def from_json(path) -> "ExperimentConfig":
        with open(path) as fh:
            doc = json.load(fh)
        doc.setdefault("split", (0.6, 0.2, 0.2))
        doc["split"] = tuple(doc["split"])
        return ExperimentConfig(**doc)


@dataclass
class ResultRecord:
    model: str
    task: str
    noise: bool
    trial: int
    seed: int
    nrmse: float
    seconds: float
    failed: bool = False
    error: str = ""
    detail: dict = field(default_factory=dict)  # gammas or hyperparameters
    residuals: list = field(default_factory=list)
    predictions: list = field(default_factory=list)
    truth_digest: str = ""


def task_series(cfg: ExperimentConfig) -> TimeSeries:
    """The series every model in this experiment consumes (built once)."""
    ts = gen_mso(TASKS[cfg.task], cfg.phi, cfg.T)
    if cfg.noise:
        ts = add_noise(ts, cfg.noise_ratio, seed=cfg.base_seed + TASKS[cfg.task])
    return ts


def select_groups(cfg: ExperimentConfig, ts: TimeSeries) -> int:
    """Group count: explicit override, else peaks of the noiseless signal,
    else peaks of the noisy signal at raised prominence."""
    if cfg.groups is not None:
        return cfg.groups
    if ts.noise_ratio == 0:
        return count_spectral_peaks(psd_estimate(ts), prominence=0.05)
    clean = gen_mso(ts.K, ts.phi, len(ts.values))
    try:
        return count_spectral_peaks(psd_estimate(clean), prominence=0.05)
    except ValueError:
        return count_spectral_peaks(psd_estimate(ts), prominence=0.1)


def _digest(arr: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()


def run_tornn_trial(cfg, ds, groups, trial_idx) -> ResultRecord:
    seed = cfg.base_seed + trial_idx
    hp = cfg.tornn
    t0 = time.perf_counter()
    weights = build_topology(groups, N=hp["N"], p=hp["p"], q=hp["q"],
                             rho=hp["rho"], seed=seed)
    pre = _digest(weights.W_r) + _digest(weights.W_i)
    tc = TrainConfig(tau_tnc=hp["tau_tnc"], lam=hp["lam"],
                     learning_rate=hp["learning_rate"],
                     max_epochs=hp["max_epochs"], patience=hp["patience"],
                     seed=seed, init_candidates=hp["init_candidates"])
    gammas, readout, result = train_tornn(weights, ds, tc)
    post = _digest(weights.W_r) + _digest(weights.W_i)
    if pre != post:
        raise RuntimeError("fixed weights mutated during training")
    err, preds, truth = predict_tornn(weights, gammas, readout, ds)
    return ResultRecord(
        model="tornn", task=cfg.task, noise=cfg.noise, trial=trial_idx,
        seed=seed, nrmse=err, seconds=time.perf_counter() - t0,
        detail={"gamma1": gammas.gamma1.tolist(),
                "gamma2": gammas.gamma2.tolist(),
                "epochs": result.epochs_run,
                "val_nrmse": result.val_nrmse,
                "weights_digest": pre},
        residuals=(preds - truth).tolist(), predictions=preds.tolist(),
        truth_digest=_digest(truth))


def run_ernn_trial(cfg, ds, groups, trial_idx) -> ResultRecord:
    seed = cfg.base_seed + trial_idx
    hp = cfg.ernn
    t0 = time.perf_counter()
    tc = TrainConfig(tau_tnc=hp["tau_tnc"], lam=hp["lam"],
                     learning_rate=hp["learning_rate"],
                     max_epochs=hp["max_epochs"], patience=hp["patience"],
                     seed=seed)
    w, readout, result = train_ernn(hp["N_r"], ds, tc)
    err, preds, truth = predict_ernn(w, readout, ds)
    return ResultRecord(
        model="ernn", task=cfg.task, noise=cfg.noise, trial=trial_idx,
        seed=seed, nrmse=err, seconds=time.perf_counter() - t0,
        detail={"epochs": result.epochs_run, "val_nrmse": result.val_nrmse},
        residuals=(preds - truth).tolist(), predictions=preds.tolist(),
        truth_digest=_digest(truth))


def run_esn_trials(cfg, ds, groups) -> list:
    """GA once per experiment, then one reservoir per trial at the optimum."""
    hp_cfg = cfg.esn
    ga = GaConfig(population=hp_cfg["population"],
                  generations=hp_cfg["generations"],
                  reservoir_seeds=hp_cfg["reservoir_seeds"],
                  seed=cfg.base_seed)
    t0 = time.perf_counter()
    best_hp, history = ga_search(ds, 20 * groups, ga)
    ga_seconds = time.perf_counter() - t0
    records = []
    for trial_idx in range(cfg.trials):
        seed = cfg.base_seed + trial_idx
        t1 = time.perf_counter()
        try:
            fit = fit_esn(best_hp, ds, 20 * groups, seed)
            err, preds, truth = predict_esn(fit, ds)
            records.append(ResultRecord(
                model="esn", task=cfg.task, noise=cfg.noise, trial=trial_idx,
                seed=seed, nrmse=err,
                seconds=time.perf_counter() - t1 + ga_seconds / cfg.trials,
                detail={"hyperparams": asdict(best_hp),
                        "ga_history": history},
                residuals=(preds - truth).tolist(),
                predictions=preds.tolist(), truth_digest=_digest(truth)))
        except (TrainingDivergence, np.linalg.LinAlgError, ValueError,
                FloatingPointError, RuntimeError) as exc:
            records.append(ResultRecord(
                model="esn", task=cfg.task, noise=cfg.noise, trial=trial_idx,
                seed=seed, nrmse=float("nan"),
                seconds=time.perf_counter() - t1, failed=True,
                error=f"{type(exc).__name__}: {exc}"))
    return records


_TRIAL_FNS = {"tornn": run_tornn_trial, "ernn": run_ernn_trial}


def _one_trial(args):
    cfg, ds, groups, kind, trial_idx = args
    try:
        return _TRIAL_FNS[kind](cfg, ds, groups, trial_idx)
    except (TrainingDivergence, np.linalg.LinAlgError, ValueError,
            FloatingPointError, RuntimeError) as exc:
        return ResultRecord(
            model=kind, task=cfg.task, noise=cfg.noise, trial=trial_idx,
            seed=cfg.base_seed + trial_idx, nrmse=float("nan"),
            seconds=0.0, failed=True, error=f"{type(exc).__name__}: {exc}")


def run_experiment(cfg: ExperimentConfig) -> list:
    """Every model x trial on the shared task series, deterministically
    ordered by (model, trial) regardless of execution order."""
    ts = task_series(cfg)
    ds = make_supervised(ts, horizon=cfg.horizon, washout=cfg.washout,
                         split=cfg.split)
    groups = select_groups(cfg, ts)
    records = []
    seq_jobs = [(cfg, ds, groups, kind, t)
                for kind in cfg.models if kind in _TRIAL_FNS
                for t in range(cfg.trials)]
    if cfg.jobs > 1 and len(seq_jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records.extend(pool.map(_one_trial, seq_jobs))
    else:
        records.extend(_one_trial(j) for j in seq_jobs)
    if "esn" in cfg.models:
        records.extend(run_esn_trials(cfg, ds, groups))
    order = {kind: i for i, kind in enumerate(cfg.models)}
    records.sort(key=lambda r: (order[r.model], r.trial))
    return records


def summarize(records) -> list:
    """Rows of (task, model, mean, std, n_trials, n_failed); population std."""
    if not records:
        raise ValueError("no records to summarize")
    keys = sorted({(r.task, r.noise, r.model) for r in records})
    rows = []
    for task, noise, model in keys:
        vals = [r.nrmse for r in records
                if (r.task, r.noise, r.model) == (task, noise, model)
                and not r.failed]
        n_failed = sum(r.failed for r in records
                       if (r.task, r.noise, r.model) == (task, noise, model))
        label = task + ("+noise" if noise else "")
        mean = float(np.mean(vals)) if vals else float("nan")
        std = float(np.std(vals)) if vals else float("nan")
        rows.append((label, model, mean, std, len(vals), n_failed))
    return rows


def summary_to_csv(rows, path) -> None:
    lines = ["task,model,mean_nrmse,std_nrmse,n_trials,n_failed"]
    for label, model, mean, std, n, n_failed in rows:
        lines.append(f"{label},{model},{mean:.10g},{std:.10g},{n},{n_failed}")
    Path(path).write_text("\n".join(lines) + "\n")


def emit_plot_data(records, out_dir, cfg: ExperimentConfig) -> None:
    """Per-trial CSV of t,truth,prediction,residual over the test range."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ts = task_series(cfg)
    ds = make_supervised(ts, horizon=cfg.horizon, washout=cfg.washout,
                         split=cfg.split)
    r = ds.test_range
    truth = ds.targets[r.start:r.stop]
    t_axis = np.arange(r.start, r.stop)
    for rec in records:
        if rec.failed:
            continue
        label = rec.task + ("n" if rec.noise else "")
        preds = np.array(rec.predictions)
        resid = np.array(rec.residuals)
        rows = np.column_stack([t_axis, truth, preds, resid])
        np.savetxt(out / f"{label}_{rec.model}_{rec.trial}.csv", rows,
                   delimiter=",", header="t,truth,prediction,residual",
                   comments="", fmt="%.10g")


def records_to_json(records, path) -> None:
    with open(path, "w") as fh:
        json.dump([asdict(r) for r in records], fh)


def records_from_json(path) -> list:
    with open(path) as fh:
        return [ResultRecord(**doc) for doc in json.load(fh)]


def _add_common(p):
    p.add_argument("--task", choices=list(TASKS), default="x2")
    p.add_argument("--noise", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tornn",
        description="Grouped bandpass RNN benchmark on superimposed oscillators")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="emit a task series CSV")
    _add_common(p)

    p = sub.add_parser("spectrum", help="emit PSD CSV and print peak count")
    _add_common(p)

    p = sub.add_parser("train", help="train one model for one trial")
    _add_common(p)
    p.add_argument("--model", choices=["tornn", "ernn", "esn"],
                   default="tornn")
    p.add_argument("--groups", type=int, default=None)
    p.add_argument("--config", default=None)

    p = sub.add_parser("bench", help="full multi-trial experiment")
    _add_common(p)
    p.add_argument("--model", action="append", dest="model_list",
                   choices=["tornn", "ernn", "esn"], default=None)
    p.add_argument("--trials", type=int, default=None)  # None: keep config
    p.add_argument("--groups", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--config", default=None)

    p = sub.add_parser("summarize", help="summary CSV from records.json")
    p.add_argument("records")
    p.add_argument("--out", default="summary.csv")

    args = parser.parse_args(argv)

    if args.cmd == "summarize":
        rows = summarize(records_from_json(args.records))
        summary_to_csv(rows, args.out)
        print(f"wrote {args.out}")
        return 0

    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig(task=args.task, noise=args.noise,
                               base_seed=args.seed, out_dir=args.out)
    if getattr(args, "groups", None) is not None:
        cfg.groups = args.groups

    out = Path(cfg.out_dir)
    if args.cmd == "gen":
        out.mkdir(parents=True, exist_ok=True)
        ts = task_series(cfg)
        label = cfg.task + ("n" if cfg.noise else "")
        path = out / f"{label}.csv"
        series_to_csv(ts, path)
        print(f"wrote {path} ({ts.T} samples)")
        return 0

    if args.cmd == "spectrum":
        out.mkdir(parents=True, exist_ok=True)
        ts = task_series(cfg)
        sp = psd_estimate(ts)
        prom = 0.05 if ts.noise_ratio == 0 else 0.1
        label = cfg.task + ("n" if cfg.noise else "")
        path = out / f"{label}_psd.csv"
        spectrum_to_csv(sp, path)
        print(f"wrote {path}; peaks at prominence {prom}: "
              f"{count_spectral_peaks(sp, prom)}")
        return 0

    if args.cmd == "train":
        out.mkdir(parents=True, exist_ok=True)
        ts = task_series(cfg)
        ds = make_supervised(ts, horizon=cfg.horizon, washout=cfg.washout,
                             split=cfg.split)
        groups = select_groups(cfg, ts)
        if args.model == "esn":
            recs = run_esn_trials(
                ExperimentConfig(**{**asdict_cfg(cfg), "trials": 1,
                                    "models": ["esn"]}), ds, groups)
            rec = recs[0]
        else:
            rec = _one_trial((cfg, ds, groups, args.model, 0))
        if rec.failed:
            print(f"trial failed: {rec.error}")
            return 1
        print(f"{args.model} on {cfg.task}"
              f"{' +noise' if cfg.noise else ''}: test NRMSE {rec.nrmse:.4f} "
              f"({rec.seconds:.1f}s)")
        records_to_json([rec], out / "records.json")
        return 0

    if args.cmd == "bench":
        if args.model_list:
            cfg.models = args.model_list
        if args.trials is not None:
            cfg.trials = args.trials
        if args.jobs is not None:
            cfg.jobs = args.jobs
        out.mkdir(parents=True, exist_ok=True)
        records = run_experiment(cfg)
        records_to_json(records, out / "records.json")
        rows = summarize(records)
        summary_to_csv(rows, out / "summary.csv")
        emit_plot_data(records, out, cfg)
        for row in rows:
            print(f"{row[0]:>10s} {row[1]:>6s}: mean {row[2]:.4f} "
                  f"std {row[3]:.4f} (n={row[4]}, failed={row[5]})")
        return 0

    return 1


def asdict_cfg(cfg: ExperimentConfig) -> dict:
    doc = asdict(cfg)
    return doc


if __name__ == "__main__":
    sys.exit(main())
