"""Batch experiments: parameter grids, seeded repeats, reports, traces.

A single experiment fixes one dataset and one algorithm, sweeps a grid of
parameters, and repeats every grid cell ``runs_per_cell`` times with seeds
``base_seed + run``. Results aggregate to per-cell means and population
variances of NMI and Rand index against ground truth, so best cells are
selected with knowledge of the labels (reports say so explicitly).

All output files are deterministic byte for byte: runs merge in (cell, run)
order regardless of how many worker threads executed them, floats are
written with repr precision, and nothing time- or host-dependent is
recorded.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cofkm import cofkm_fit, consensus_membership, heuristic_fuzzifier
from .dataset import (
    MultiViewDataset,
    SyntheticSpec,
    generate_synthetic,
    load_multiview,
    normalize_minmax,
)
from .errors import ConfigError, DataError
from .fcm import defuzzify, fcm_fit
from .hss import HssConfig, hss_fit
from .metrics import nmi, rand_index
from .nmf import max_rank, shared_nmf_fit
from .stats import ScoreTable

ALGORITHMS = ("fcm", "cofkm", "hss", "shared_nmf+fcm")

_GRID_KEYS = {
    "fcm": {"m"},
    "cofkm": {"m", "eta"},
    "hss": {"m", "lam", "eta", "r"},
    "shared_nmf+fcm": {"m", "r"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs; exactly one data source is set."""

    algorithm: str
    view_paths: tuple[str, ...] | None = None
    label_path: str | None = None
    header: bool = False
    synthetic: SyntheticSpec | None = None
    normalize: bool = True
    clusters: int | None = None
    grid: dict | None = None
    runs_per_cell: int = 10
    base_seed: int = 0
    tol: float = 1e-6
    t_max: int = 1000
    h_inner_steps: int = 1
    jobs: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {self.algorithm!r}; "
                f"choose one of {', '.join(ALGORITHMS)}"
            )
        has_files = bool(self.view_paths)
        has_synth = self.synthetic is not None
        if has_files == has_synth:
            raise ConfigError("set exactly one of view_paths or synthetic")
        if self.view_paths is not None:
            object.__setattr__(self, "view_paths", tuple(self.view_paths))
        if self.runs_per_cell < 1:
            raise ConfigError("runs_per_cell must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.t_max < 1:
            raise ConfigError("t_max must be at least 1")
        if self.h_inner_steps < 1:
            raise ConfigError("h_inner_steps must be at least 1")
        if self.grid is None:
            return
        # An omitted grid means the default sweep; an empty one is a mistake.
        if not self.grid:
            raise ConfigError("grid must name at least one parameter")
        allowed = _GRID_KEYS[self.algorithm]
        unknown = set(self.grid) - allowed
        if unknown:
            raise ConfigError(
                f"grid key(s) {sorted(unknown)} not valid for "
                f"{self.algorithm}; allowed: {sorted(allowed)}"
            )
        grid = {}
        for key in sorted(self.grid):
            values = tuple(self.grid[key])
            if not values:
                raise ConfigError(f"grid key {key!r} has no values")
            grid[key] = values
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class RunRecord:
    cell_index: int
    run_index: int
    seed: int
    params: dict
    nmi: float
    rand_index: float
    final_objective: float
    iterations: int


@dataclass(frozen=True)
class RunTrace:
    cell_index: int
    run_index: int
    objective: np.ndarray
    weights: np.ndarray | None


@dataclass(frozen=True)
class CellSummary:
    cell_index: int
    params: dict
    nmi_mean: float
    nmi_var: float
    ri_mean: float
    ri_var: float


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    cells: tuple[CellSummary, ...]
    records: tuple[RunRecord, ...]
    traces: tuple[RunTrace, ...]
    best_by_nmi: int
    best_by_ri: int


def load_experiment_dataset(cfg: ExperimentConfig) -> MultiViewDataset:
    """Materialize the configured dataset, normalized if requested."""
    if cfg.synthetic is not None:
        return generate_synthetic(cfg.synthetic)
    ds = load_multiview(cfg.view_paths, cfg.label_path, header=cfg.header)
    if cfg.normalize:
        ds = normalize_minmax(ds)
    return ds


def default_grid(algorithm: str, ds: MultiViewDataset) -> dict:
    """The standard sweep: wide lam/eta ranges, rank steps of 10, one m.

    lam covers powers of two from 2^-3 to 2^14, eta powers of ten from
    1e-7 to 1e7, and the rank runs 10, 20, ... capped at what the dataset
    admits. The fuzzifier comes from the heuristic rule.
    """
    m = heuristic_fuzzifier(ds.n_samples, min(ds.view_dims))
    grid: dict = {"m": [m]}
    if algorithm in ("hss", "shared_nmf+fcm"):
        cap = max_rank(ds)
        ranks = [r for r in range(10, 101, 10) if r <= cap]
        grid["r"] = ranks or [cap]
    if algorithm == "hss":
        grid["lam"] = [float(2.0**e) for e in range(-3, 15)]
        grid["eta"] = [float(10.0**e) for e in range(-7, 8)]
    if algorithm == "cofkm":
        grid["eta"] = [0.5]
    return grid


def _expand_cells(cfg: ExperimentConfig, ds: MultiViewDataset, c: int) -> list[dict]:
    """Cartesian product of the grid in sorted-key order, validated upfront."""
    grid = cfg.grid if cfg.grid is not None else default_grid(cfg.algorithm, ds)
    keys = sorted(grid)
    cells = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    for cell in cells:
        params = _fill_defaults(cfg.algorithm, cell, ds)
        _validate_params(cfg.algorithm, params, ds, c)
    return cells


def _fill_defaults(algorithm: str, cell: dict, ds: MultiViewDataset) -> dict:
    params = dict(cell)
    if "m" not in params:
        if algorithm == "fcm":
            width = sum(ds.view_dims)
        else:
            width = min(ds.view_dims)
        params["m"] = heuristic_fuzzifier(ds.n_samples, width)
    if algorithm == "cofkm":
        params.setdefault("eta", 0.5)
    if algorithm == "hss":
        params.setdefault("lam", 1.0)
        params.setdefault("eta", 1.0)
    if algorithm in ("hss", "shared_nmf+fcm"):
        params.setdefault("r", min(10, max_rank(ds)))
    return params


def _validate_params(algorithm: str, params: dict, ds: MultiViewDataset, c: int):
    if params["m"] <= 1.0:
        raise ConfigError(f"fuzzifier must exceed 1, got {params['m']}")
    if not 1 <= c <= ds.n_samples:
        raise ConfigError(f"clusters must lie in [1, {ds.n_samples}], got {c}")
    if algorithm == "cofkm" and not 0.0 <= params["eta"] < 1.0:
        raise ConfigError(f"cofkm eta must lie in [0, 1), got {params['eta']}")
    if algorithm == "hss":
        if params["lam"] <= 0:
            raise ConfigError(f"lam must be positive, got {params['lam']}")
        if params["eta"] <= 0:
            raise ConfigError(f"hss eta must be positive, got {params['eta']}")
    if algorithm in ("hss", "shared_nmf+fcm"):
        r = params["r"]
        if r != int(r) or not 1 <= int(r) <= max_rank(ds):
            raise ConfigError(
                f"rank must be an integer in [1, {max_rank(ds)}], got {r}"
            )


def _single_run(ds, truth, algorithm, params, c, seed, cfg):
    """One fit plus metrics; returns the record fields and the trace."""
    weights_trace = None
    if algorithm == "fcm":
        data = np.vstack(ds.views)
        result = fcm_fit(
            data, c, params["m"], seed=seed, tol=cfg.tol, t_max=cfg.t_max
        )
        labels = defuzzify(result.partition)
        objective_trace = result.objective_trace
    elif algorithm == "cofkm":
        result = cofkm_fit(
            ds, c, params["m"], params["eta"],
            seed=seed, tol=cfg.tol, t_max=cfg.t_max,
        )
        labels = defuzzify(consensus_membership(result.state))
        objective_trace = result.objective_trace
    elif algorithm == "hss":
        hss_cfg = HssConfig(
            c=c,
            r=int(params["r"]),
            fuzzifier_m=params["m"],
            lam=params["lam"],
            eta=params["eta"],
            tol=cfg.tol,
            t_max=cfg.t_max,
            h_inner_steps=cfg.h_inner_steps,
            seed=seed,
        )
        result = hss_fit(ds, hss_cfg)
        labels = defuzzify(result.state.partition)
        objective_trace = result.trace.objective
        weights_trace = result.trace.weights
    else:
        nmf_result = shared_nmf_fit(
            ds, int(params["r"]), seed=seed, tol=cfg.tol, t_max=cfg.t_max
        )
        result = fcm_fit(
            nmf_result.factorization.coeff, c, params["m"],
            seed=seed, tol=cfg.tol, t_max=cfg.t_max,
        )
        labels = defuzzify(result.partition)
        objective_trace = result.objective_trace

    return (
        float(nmi(labels, truth)),
        float(rand_index(labels, truth)),
        float(objective_trace[-1]),
        len(objective_trace) - 1,
        objective_trace,
        weights_trace,
    )


def _aggregate(cell_index: int, params: dict, records: list[RunRecord]) -> CellSummary:
    nmis = np.array([rec.nmi for rec in records])
    ris = np.array([rec.rand_index for rec in records])
    return CellSummary(
        cell_index=cell_index,
        params=params,
        nmi_mean=float(nmis.mean()),
        nmi_var=float(nmis.var()),
        ri_mean=float(ris.mean()),
        ri_var=float(ris.var()),
    )


def _config_echo(cfg: ExperimentConfig) -> dict:
    echo = {
        "algorithm": cfg.algorithm,
        "view_paths": list(cfg.view_paths) if cfg.view_paths else None,
        "label_path": cfg.label_path,
        "header": cfg.header,
        "synthetic": None,
        "normalize": cfg.normalize,
        "clusters": cfg.clusters,
        "grid": None if cfg.grid is None else {k: list(v) for k, v in cfg.grid.items()},
        "runs_per_cell": cfg.runs_per_cell,
        "base_seed": cfg.base_seed,
        "tol": cfg.tol,
        "t_max": cfg.t_max,
        "h_inner_steps": cfg.h_inner_steps,
    }
    if cfg.synthetic is not None:
        spec = cfg.synthetic
        echo["synthetic"] = {
            "n": spec.n,
            "c_true": spec.c_true,
            "r_true": spec.r_true,
            "view_dims": list(spec.view_dims),
            "noise_sigma": spec.noise_sigma,
            "seed": spec.seed,
        }
    return echo


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Sweep the grid, repeat every cell, aggregate, optionally write files."""
    ds = load_experiment_dataset(cfg)
    truth = ds.require_labels()
    c = cfg.clusters if cfg.clusters is not None else int(np.unique(truth).size)
    cells = _expand_cells(cfg, ds, c)
    filled = [_fill_defaults(cfg.algorithm, cell, ds) for cell in cells]

    jobs = [
        (ci, ri, cfg.base_seed + ri)
        for ci in range(len(filled))
        for ri in range(cfg.runs_per_cell)
    ]

    def execute(job):
        ci, ri, seed = job
        return _single_run(ds, truth, cfg.algorithm, filled[ci], c, seed, cfg)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            outputs = list(pool.map(execute, jobs))
    else:
        outputs = [execute(job) for job in jobs]

    records = []
    traces = []
    for (ci, ri, seed), out in zip(jobs, outputs):
        score_nmi, score_ri, final_obj, iters, obj_trace, w_trace = out
        records.append(
            RunRecord(
                cell_index=ci,
                run_index=ri,
                seed=seed,
                params=filled[ci],
                nmi=score_nmi,
                rand_index=score_ri,
                final_objective=final_obj,
                iterations=iters,
            )
        )
        traces.append(RunTrace(ci, ri, obj_trace, w_trace))

    cells_summary = []
    for ci in range(len(filled)):
        cell_records = [rec for rec in records if rec.cell_index == ci]
        cells_summary.append(_aggregate(ci, filled[ci], cell_records))
    best_nmi = max(range(len(cells_summary)), key=lambda i: (cells_summary[i].nmi_mean, -i))
    best_ri = max(range(len(cells_summary)), key=lambda i: (cells_summary[i].ri_mean, -i))

    report = ExperimentReport(
        config=_config_echo(cfg),
        cells=tuple(cells_summary),
        records=tuple(records),
        traces=tuple(traces),
        best_by_nmi=best_nmi,
        best_by_ri=best_ri,
    )
    if cfg.output_dir is not None:
        write_report(report, cfg.output_dir)
    return report


def _param_columns(report: ExperimentReport) -> list[str]:
    if not report.records:
        return []
    return sorted(report.records[0].params)


def write_report_csv(report: ExperimentReport, path: str | Path) -> None:
    param_cols = _param_columns(report)
    lines = [
        ",".join(
            ["cell", "run", "seed", *param_cols,
             "nmi", "rand_index", "final_objective", "iterations"]
        )
    ]
    for rec in report.records:
        row = [str(rec.cell_index), str(rec.run_index), str(rec.seed)]
        row += [repr(float(rec.params[k])) for k in param_cols]
        row += [
            repr(rec.nmi),
            repr(rec.rand_index),
            repr(rec.final_objective),
            str(rec.iterations),
        ]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_json(report: ExperimentReport, path: str | Path) -> None:
    def cell_dict(cell: CellSummary) -> dict:
        return {
            "cell_index": cell.cell_index,
            "params": cell.params,
            "nmi_mean": cell.nmi_mean,
            "nmi_var": cell.nmi_var,
            "ri_mean": cell.ri_mean,
            "ri_var": cell.ri_var,
        }

    payload = {
        "config": report.config,
        "selection": "oracle(ground truth)",
        "cells": [cell_dict(cell) for cell in report.cells],
        "best_by_nmi": cell_dict(report.cells[report.best_by_nmi]),
        "best_by_ri": cell_dict(report.cells[report.best_by_ri]),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def export_traces(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """One CSV per run: iteration, objective, delta, then any view weights."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for trace in report.traces:
        path = out / f"trace_c{trace.cell_index:03d}_r{trace.run_index:02d}.csv"
        header = ["iteration", "objective", "delta"]
        if trace.weights is not None:
            header += [f"w_{k + 1}" for k in range(trace.weights.shape[1])]
        lines = [",".join(header)]
        objective = trace.objective
        for t in range(1, objective.size):
            row = [
                str(t),
                repr(float(objective[t])),
                repr(float(objective[t - 1] - objective[t])),
            ]
            if trace.weights is not None:
                row += [repr(float(x)) for x in trace.weights[t]]
            lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def write_report(report: ExperimentReport, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_csv(report, out / "report.csv")
    write_summary_json(report, out / "summary.json")
    export_traces(report, out / "traces")


def build_score_table(
    entries, metric: str = "nmi", *, higher_is_better: bool = True
) -> ScoreTable:
    """Assemble a cross-experiment score table for the rank tests.

    ``entries`` is an iterable of ``(dataset_name, algorithm_name, report)``
    triples; the value used is the best cell's mean for the chosen metric.
    Every dataset/algorithm pair must appear exactly once.
    """
    if metric not in ("nmi", "ri"):
        raise DataError(f"metric must be 'nmi' or 'ri', got {metric!r}")
    table: dict = {}
    datasets: list[str] = []
    algorithms: list[str] = []
    for dataset, algorithm, report in entries:
        key = (dataset, algorithm)
        if key in table:
            raise DataError(f"duplicate entry for {dataset!r} / {algorithm!r}")
        if metric == "nmi":
            best = report.cells[report.best_by_nmi].nmi_mean
        else:
            best = report.cells[report.best_by_ri].ri_mean
        table[key] = best
        if dataset not in datasets:
            datasets.append(dataset)
        if algorithm not in algorithms:
            algorithms.append(algorithm)
    missing = [
        (d, a) for d in datasets for a in algorithms if (d, a) not in table
    ]
    if missing:
        raise DataError(f"missing results for {missing}")
    scores = np.array(
        [[table[(d, a)] for a in algorithms] for d in datasets]
    )
    return ScoreTable(scores, tuple(algorithms), tuple(datasets), higher_is_better)
