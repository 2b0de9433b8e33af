"""Seeded experiment orchestration, CSV persistence and schedule sweeps."""

import csv
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from pilotlab.diagnostics import RunSummary, summarize
from pilotlab.harness.config import DEFAULT_DECAY_ALPHA0, format_config
from pilotlab.optimizers import TRACE_COLUMNS, Trace, resolve_problem, run_training
from pilotlab.schedules import default_sweep

log = logging.getLogger(__name__)

Z95 = 1.96
AGG_COLUMNS = ("step", "time", "loss_mean", "loss_lo", "loss_hi", "dist_mean", "dist_lo", "dist_hi")


def _fmt(v):
    v = float(v)
    return "" if np.isnan(v) else format(v, ".17g")


def write_trace_csv(trace, path):
    cols = trace.columns()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for i in range(len(trace)):
            row = [str(int(cols["step"][i]))] + [_fmt(cols[c][i]) for c in TRACE_COLUMNS[1:]]
            w.writerow(row)


def read_trace_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        rows = [r for r in reader if r]
    data = {c: np.array([float(r[j]) if r[j] != "" else np.nan for r in rows]) for j, c in enumerate(TRACE_COLUMNS)}
    data["step"] = data["step"].astype(np.int64)
    return Trace(**data)


@dataclass
class Aggregate:
    label: str
    step: np.ndarray
    time: np.ndarray
    loss_mean: np.ndarray
    loss_lo: np.ndarray
    loss_hi: np.ndarray
    dist_mean: np.ndarray
    dist_lo: np.ndarray
    dist_hi: np.ndarray
    n_seeds: int = 1

    def series(self, metric):
        return getattr(self, f"{metric}_mean"), getattr(self, f"{metric}_lo"), getattr(self, f"{metric}_hi")


def mean_band(samples):
    """Row-wise mean and ``mean +- 1.96 sd / sqrt(count)`` over axis 0."""
    samples = np.asarray(samples, dtype=float)
    mean = samples.mean(axis=0)
    if samples.shape[0] < 2:
        return mean, mean.copy(), mean.copy()
    half = Z95 * samples.std(axis=0, ddof=1) / np.sqrt(samples.shape[0])
    return mean, mean - half, mean + half


def aggregate(traces, label=""):
    L = min(len(t) for t in traces)
    lm, ll, lh = mean_band([t.loss[:L] for t in traces])
    dm, dl, dh = mean_band([t.dist_to_truth[:L] for t in traces])
    t0 = traces[0]
    return Aggregate(label, t0.step[:L], t0.time[:L], lm, ll, lh, dm, dl, dh, n_seeds=len(traces))


def write_aggregate_csv(agg, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_COLUMNS)
        for i in range(len(agg.step)):
            w.writerow([str(int(agg.step[i]))] + [_fmt(getattr(agg, c)[i]) for c in AGG_COLUMNS[1:]])


def read_aggregate_csv(path, label=None):
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != AGG_COLUMNS:
            raise ValueError(f"unexpected aggregate header {header}")
        rows = [r for r in reader if r]
    cols = {c: np.array([float(r[j]) for r in rows]) for j, c in enumerate(AGG_COLUMNS)}
    cols["step"] = cols["step"].astype(np.int64)
    return Aggregate(label or path.parent.name or path.stem, **cols)


def write_summary_csv(summaries, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=RunSummary.CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for s in summaries:
            w.writerow(s.csv_row())


@dataclass
class ExperimentResult:
    config: object
    traces: list
    summaries: list
    aggregate: Aggregate
    output_dir: Path = None
    extras: dict = field(default_factory=dict)


def _one_seed(args):
    config, seed = args
    problem = resolve_problem(config)
    trace = run_training(config, seed=seed, problem=problem)
    return trace, summarize(trace, problem, seed)


def run_experiment(config, write=True, label=None):
    """Run every seed of ``config``; optionally persist traces and summaries."""
    jobs = [(config, s) for s in config.seeds]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_one_seed, jobs))
    else:
        results = [_one_seed(j) for j in jobs]
    traces = [r[0] for r in results]
    summaries = [r[1] for r in results]
    for s in summaries:
        if s.diverged:
            log.warning("seed %d diverged", s.seed)
    label = label or traces[0].label
    agg = aggregate(traces, label)
    out = None
    if write:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.echo").write_text(format_config(config), encoding="utf-8")
        for seed, tr in zip(config.seeds, traces):
            write_trace_csv(tr, out / f"trace_seed{seed}.csv")
        write_summary_csv(summaries, out / "summary.csv")
        write_aggregate_csv(agg, out / "aggregate.csv")
    return ExperimentResult(config, traces, summaries, agg, out)


@dataclass
class SweepRow:
    label: str
    final_mean_distance: float
    final_mean_sparsity: float
    best: bool = False
    decaying: bool = False
    error: str = ""
    result: ExperimentResult = None


def _slug(label):
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label).strip("_")


def run_sweep(base, schedules=None, write=True):
    """One experiment per schedule; flags the row with the lowest final mean distance.

    The default grid takes its decaying ``alpha0`` from ``base`` only when the base
    schedule is itself decaying, so every method sweeps the same seven schedules.
    """
    if schedules is None:
        sched = base.schedule
        alpha0 = sched.alpha0 if sched.decaying else DEFAULT_DECAY_ALPHA0
        schedules = default_sweep(alpha0, base.sweep_constants, sched.p, sched.epoch_len)
    if not schedules:
        raise ValueError("empty schedule list")
    rows = []
    for spec in schedules:
        cell = base.with_schedule(spec).with_updates(output_dir=str(Path(base.output_dir) / _slug(spec.label)))
        try:
            res = run_experiment(cell, write=write, label=f"{base.method}/{spec.label}")
            rows.append(SweepRow(
                spec.label,
                float(np.mean([s.final_distance for s in res.summaries])),
                float(np.mean([s.final_sparsity for s in res.summaries])),
                decaying=spec.decaying,
                result=res,
            ))
        except Exception as exc:  # a failing cell must not stop the sweep
            log.error("sweep cell %s failed: %s", spec.label, exc)
            rows.append(SweepRow(spec.label, float("nan"), float("nan"), decaying=spec.decaying, error=str(exc)))
    finite = [r for r in rows if np.isfinite(r.final_mean_distance)]
    if finite:
        min(finite, key=lambda r: r.final_mean_distance).best = True
    if write:
        out = Path(base.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["schedule", "final_mean_distance", "final_mean_sparsity", "best", "error"])
            for r in rows:
                w.writerow([r.label, _fmt(r.final_mean_distance), _fmt(r.final_mean_sparsity), "1" if r.best else "0", r.error])
    return rows


def best_row(rows):
    return next(r for r in rows if r.best)
