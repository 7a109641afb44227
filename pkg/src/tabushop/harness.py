"""Experiment orchestration: configs, parallel runs, file outputs.

Each run is fully independent (own seed = seed_base + run_index, own output
files), so parallelism is a process pool over runs; parallel and sequential
execution produce identical per-run files apart from elapsed-time fields.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dominance, runlog
from .encoding import build_index_set
from .gta import GtaParams, run_gta
from .instances import Instance, load_instance, parse_reference, reference_to_text
from .learning import ObjectiveBounds, TrainingTable, accuracy, build_training_table, fit_theta
from .tabu import RunParams, TenureRange, run_tabu

ENV_OUT_DIR = "TABUSHOP_OUT"


@dataclass(frozen=True)
class ExperimentConfig:
    instance: str
    fmt: str = "std"
    algo: str = "tabu"
    runs: int = 1
    seed: int = 1
    nepochs: int = 1
    niters: int = 1000
    tmin: int = 5
    tmax: int = 11
    theta_min: float = 0.001
    theta_max: float = 1.0
    d: int = 100
    epsilon: float = 1e-4
    time_limit: float | None = None
    emit_bounds: bool = False
    out: str = field(default_factory=lambda: os.environ.get(ENV_OUT_DIR, "runs"))
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.algo not in ("tabu", "gta"):
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not Path(self.instance).exists():
            raise FileNotFoundError(self.instance)
        # Construct the parameter objects early so bad values fail before any run.
        TenureRange(self.tmin, self.tmax)
        if self.algo == "gta":
            GtaParams(
                nepochs=self.nepochs, niters=self.niters, seed=self.seed,
                tenure_range=TenureRange(self.tmin, self.tmax),
                theta_min=self.theta_min, theta_max=self.theta_max,
                d=self.d, epsilon=self.epsilon,
            )
        else:
            RunParams(nepochs=self.nepochs, niters=self.niters, seed=self.seed)
        return self


def run_stem(cfg: ExperimentConfig, seed: int) -> str:
    inst_name = Path(cfg.instance).stem
    return f"{inst_name}_{cfg.algo}_s{seed}"


def _execute_one(cfg: ExperimentConfig, run_index: int) -> dict:
    """Worker body: one seeded run, files written, summary returned."""
    inst = load_instance(cfg.instance, cfg.fmt)
    seed = cfg.seed + run_index
    tenure = TenureRange(cfg.tmin, cfg.tmax)
    if cfg.algo == "gta":
        params = GtaParams(
            nepochs=cfg.nepochs, niters=cfg.niters, seed=seed, tenure_range=tenure,
            theta_min=cfg.theta_min, theta_max=cfg.theta_max, d=cfg.d, epsilon=cfg.epsilon,
        )
        result = run_gta(inst, params, emit_bounds=cfg.emit_bounds, time_limit=cfg.time_limit)
    else:
        params = RunParams(nepochs=cfg.nepochs, niters=cfg.niters, seed=seed)
        result = run_tabu(
            inst, params, tenure, d=cfg.d, emit_bounds=cfg.emit_bounds, time_limit=cfg.time_limit
        )

    outdir = Path(cfg.out)
    stem = run_stem(cfg, seed)
    log_path = outdir / f"{stem}.jsonl"
    sol_path = outdir / f"{stem}.sol"
    runlog.write_jsonl(result.records, log_path)
    sol_path.parent.mkdir(parents=True, exist_ok=True)
    sol_path.write_text(reference_to_text(result.best_solution.sequences, inst))
    paths = {"log": str(log_path), "solution": str(sol_path)}
    if cfg.emit_bounds and result.bounds_snapshots is not None:
        bounds_path = outdir / f"{stem}.bounds.npz"
        epochs = [e for e, _, _ in result.bounds_snapshots]
        d1_rows = [d1 for _, d1, _ in result.bounds_snapshots]
        d0_rows = [d0 for _, _, d0 in result.bounds_snapshots]
        runlog.write_bounds_snapshots(bounds_path, epochs, d1_rows, d0_rows)
        paths["bounds"] = str(bounds_path)
    return {
        "seed": seed,
        "best": result.best_makespan,
        "degenerate": result.degenerate,
        **paths,
    }


def solve_experiment(cfg: ExperimentConfig) -> list[dict]:
    """All runs of the experiment; returns one summary dict per run."""
    cfg = cfg.validate()
    if cfg.workers == 1 or cfg.runs == 1:
        return [_execute_one(cfg, i) for i in range(cfg.runs)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(_execute_one, cfg, i) for i in range(cfg.runs)]
        return [f.result() for f in futures]


def fit_table_rows(table: TrainingTable) -> dict:
    """Fit a standalone training table; one result row."""
    fit = fit_theta(table)
    return {
        "theta": fit.model.theta,
        "accuracy": accuracy(fit.model, table),
        "rows": len(table),
        "separated": fit.separated,
        "log_likelihood": fit.log_likelihood,
    }


def fit_bounds_files(
    inst: Instance, reference_path: str, bounds_paths: list[str]
) -> list[dict]:
    """Per-(run, epoch) theta/accuracy rows from emitted bounds snapshots."""
    idx = build_index_set(inst)
    reference = parse_reference(Path(reference_path).read_text(), inst)
    rows = []
    for path in bounds_paths:
        epochs, d1_rows, d0_rows = runlog.read_bounds_snapshots(path)
        for e, d1, d0 in zip(epochs, d1_rows, d0_rows):
            bounds = ObjectiveBounds(d1.astype(np.int64), d0.astype(np.int64))
            table = build_training_table(bounds, reference, idx)
            row = {"run": Path(path).stem.replace(".bounds", ""), "epoch": int(e)}
            if len(table) == 0:
                row.update(theta=float("nan"), accuracy=float("nan"), rows=0, separated=False)
            else:
                row.update(fit_table_rows(table))
            rows.append(row)
    return rows


def fit_rows_to_csv(rows: list[dict]) -> str:
    lines = ["run,epoch,theta,accuracy,rows,separated"]
    for r in rows:
        lines.append(
            f"{r.get('run', '-')},{r.get('epoch', 0)},{r['theta']:.10g},"
            f"{r['accuracy']:.6f},{r['rows']},{int(r['separated'])}"
        )
    return "\n".join(lines) + "\n"


def compare_logs(
    paths_a: list[str],
    paths_b: list[str],
    *,
    checkpoint_mode: str = "epoch",
    checkpoints: list | None = None,
    bucket_ms: int | None = None,
    n_boot: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> dominance.DominanceCurve:
    """Dominance curve between two sets of run-log files."""
    recs_a = [r for p in paths_a for r in runlog.read_jsonl(p)]
    recs_b = [r for p in paths_b for r in runlog.read_jsonl(p)]
    if not recs_a or not recs_b:
        raise ValueError("both log sets must be non-empty")
    inst_a = {r.instance for r in recs_a}
    inst_b = {r.instance for r in recs_b}
    common = inst_a & inst_b
    if not common:
        raise ValueError("log sets share no instances")
    recs_a = [r for r in recs_a if r.instance in common]
    recs_b = [r for r in recs_b if r.instance in common]

    rng = np.random.default_rng(seed)
    if checkpoint_mode == "epoch":
        samples_a = dominance.samples_from_records(recs_a, "A")
        samples_b = dominance.samples_from_records(recs_b, "B")
        if checkpoints is None:
            def covered(recs):
                per_run: dict[tuple, set] = {}
                for r in recs:
                    per_run.setdefault((r.instance, r.seed), set()).add(r.epoch)
                out = None
                for s in per_run.values():
                    out = s if out is None else out & s
                return out or set()

            checkpoints = sorted(covered(recs_a) & covered(recs_b))
            if not checkpoints:
                raise ValueError("no epoch is covered by every run")
    elif checkpoint_mode == "time":
        if bucket_ms is None:
            raise ValueError("time mode needs bucket_ms")
        def by_run(recs):
            grouped = {}
            for r in recs:
                grouped.setdefault((r.instance, r.seed), []).append(r)
            return grouped

        runs_a, runs_b = by_run(recs_a), by_run(recs_b)
        if checkpoints is None:
            horizon = min(max(r.elapsed_ms for r in recs) for recs in (recs_a, recs_b))
            checkpoints = list(range(bucket_ms, int(horizon) + 1, bucket_ms))
            if not checkpoints:
                raise ValueError("bucket_ms larger than the shortest log horizon")
        samples_a = dominance.samples_at_time_buckets(runs_a, checkpoints, "A")
        samples_b = dominance.samples_at_time_buckets(runs_b, checkpoints, "B")
    else:
        raise ValueError(f"unknown checkpoint mode {checkpoint_mode!r}")

    return dominance.dominance_curve(
        samples_a, samples_b, checkpoints, n_boot=n_boot, level=level, rng=rng
    )


def load_config_file(path: str) -> dict:
    """key=value config lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values
