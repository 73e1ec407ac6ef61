"""Command line interface: fit, grid, stats and synth subcommands."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from .cofkm import cofkm_fit, consensus_membership
from .dataset import (
    SyntheticSpec,
    generate_synthetic,
    load_multiview,
    normalize_minmax,
    save_multiview,
)
from .errors import ConfigError, MvfuzzError
from .fcm import defuzzify, fcm_fit
from .harness import (
    ALGORITHMS,
    ExperimentConfig,
    load_experiment_dataset,
    run_experiment,
)
from .hss import HssConfig, hss_fit
from .metrics import nmi, rand_index
from .nmf import shared_nmf_fit
from .stats import (
    format_friedman,
    format_holm,
    friedman,
    holm_posthoc,
    read_score_csv,
    write_friedman_csv,
    write_holm_csv,
)


def _parse_synthetic(text: str) -> SyntheticSpec:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse synthetic spec: {err}") from None
    if not isinstance(raw, dict):
        raise ConfigError("synthetic spec must be a mapping")
    return _spec_from_mapping(raw)


def _spec_from_mapping(raw: dict) -> SyntheticSpec:
    allowed = {"n", "c_true", "r_true", "view_dims", "noise_sigma", "seed"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown synthetic key(s): {sorted(unknown)}")
    missing = {"n", "c_true", "r_true", "view_dims"} - set(raw)
    if missing:
        raise ConfigError(f"synthetic spec misses key(s): {sorted(missing)}")
    return SyntheticSpec(
        n=int(raw["n"]),
        c_true=int(raw["c_true"]),
        r_true=int(raw["r_true"]),
        view_dims=tuple(int(d) for d in raw["view_dims"]),
        noise_sigma=float(raw.get("noise_sigma", 0.0)),
        seed=int(raw.get("seed", 0)),
    )


def _load_cli_dataset(args):
    if args.synthetic and args.views:
        raise ConfigError("give either --views or --synthetic, not both")
    if args.synthetic:
        return generate_synthetic(_parse_synthetic(args.synthetic))
    if not args.views:
        raise ConfigError("give --views or --synthetic")
    ds = load_multiview(args.views, args.labels, header=args.header)
    if not args.no_normalize:
        ds = normalize_minmax(ds)
    return ds


def _cmd_fit(args) -> int:
    ds = _load_cli_dataset(args)
    if args.clusters is not None:
        c = args.clusters
    elif ds.labels is not None:
        c = int(np.unique(ds.labels).size)
    else:
        raise ConfigError("give --clusters when the data has no labels")
    m = args.m if args.m is not None else 2.0

    weights = None
    if args.algorithm == "fcm":
        result = fcm_fit(
            np.vstack(ds.views), c, m,
            seed=args.seed, tol=args.tol, t_max=args.t_max,
        )
        labels = defuzzify(result.partition)
        trace = result.objective_trace
    elif args.algorithm == "cofkm":
        result = cofkm_fit(
            ds, c, args.m, args.eta if args.eta is not None else 0.5,
            seed=args.seed, tol=args.tol, t_max=args.t_max,
        )
        labels = defuzzify(consensus_membership(result.state))
        trace = result.objective_trace
    elif args.algorithm == "hss":
        cfg = HssConfig(
            c=c,
            r=args.r if args.r is not None else 10,
            fuzzifier_m=m,
            lam=args.lam if args.lam is not None else 1.0,
            eta=args.eta if args.eta is not None else 1.0,
            tol=args.tol,
            t_max=args.t_max,
            h_inner_steps=args.h_inner_steps,
            seed=args.seed,
        )
        result = hss_fit(ds, cfg)
        labels = defuzzify(result.state.partition)
        trace = result.trace.objective
        weights = result.state.weights.w
    else:
        nmf_result = shared_nmf_fit(
            ds, args.r if args.r is not None else 10,
            seed=args.seed, tol=args.tol, t_max=args.t_max,
        )
        result = fcm_fit(
            nmf_result.factorization.coeff, c, m,
            seed=args.seed, tol=args.tol, t_max=args.t_max,
        )
        labels = defuzzify(result.partition)
        trace = result.objective_trace

    print(f"algorithm: {args.algorithm}")
    print(f"iterations: {trace.size - 1}")
    print(f"final_objective: {trace[-1]!r}")
    if weights is not None:
        print("view_weights:", ",".join(repr(float(x)) for x in weights))
    if ds.labels is not None:
        print(f"nmi: {nmi(labels, ds.labels)!r}")
        print(f"rand_index: {rand_index(labels, ds.labels)!r}")
    else:
        print("nmi: not available (no labels)")
        print("rand_index: not available (no labels)")
    if args.assignments_out:
        np.savetxt(args.assignments_out, labels, fmt="%d")
        print(f"assignments written to {args.assignments_out}")
    return 0


def _config_from_file(path: str) -> dict:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: cannot parse: {err}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return raw


_CONFIG_KEYS = {
    "algorithm", "views", "labels", "header", "synthetic", "normalize",
    "clusters", "grid", "runs_per_cell", "base_seed", "tol", "t_max",
    "h_inner_steps", "jobs", "output_dir",
}


def _experiment_config(raw: dict) -> ExperimentConfig:
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    synthetic = raw.get("synthetic")
    if synthetic is not None:
        if not isinstance(synthetic, dict):
            raise ConfigError("synthetic must be a mapping")
        synthetic = _spec_from_mapping(synthetic)
    grid = raw.get("grid")
    if grid is not None:
        if not isinstance(grid, dict):
            raise ConfigError("grid must be a mapping of parameter lists")
        grid = {
            key: list(val) if isinstance(val, (list, tuple)) else [val]
            for key, val in grid.items()
        }
    views = raw.get("views")
    return ExperimentConfig(
        algorithm=raw.get("algorithm", "hss"),
        view_paths=tuple(views) if views else None,
        label_path=raw.get("labels"),
        header=bool(raw.get("header", False)),
        synthetic=synthetic,
        normalize=bool(raw.get("normalize", True)),
        clusters=raw.get("clusters"),
        grid=grid,
        runs_per_cell=int(raw.get("runs_per_cell", 10)),
        base_seed=int(raw.get("base_seed", 0)),
        tol=float(raw.get("tol", 1e-6)),
        t_max=int(raw.get("t_max", 1000)),
        h_inner_steps=int(raw.get("h_inner_steps", 1)),
        jobs=int(raw.get("jobs", 1)),
        output_dir=raw.get("output_dir"),
    )


def _cmd_grid(args) -> int:
    raw = _config_from_file(args.config) if args.config else {}
    overrides = {
        "algorithm": args.algorithm,
        "views": args.views,
        "labels": args.labels,
        "synthetic": yaml.safe_load(args.synthetic) if args.synthetic else None,
        "clusters": args.clusters,
        "runs_per_cell": args.runs_per_cell,
        "base_seed": args.base_seed,
        "tol": args.tol,
        "t_max": args.t_max,
        "h_inner_steps": args.h_inner_steps,
        "jobs": args.jobs,
        "output_dir": args.output_dir,
    }
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    if args.header:
        raw["header"] = True
    if args.no_normalize:
        raw["normalize"] = False
    if args.grid:
        parsed = yaml.safe_load(args.grid)
        if not isinstance(parsed, dict):
            raise ConfigError("--grid must be a mapping of parameter lists")
        raw["grid"] = parsed
    cfg = _experiment_config(raw)
    report = run_experiment(cfg)
    best_nmi = report.cells[report.best_by_nmi]
    best_ri = report.cells[report.best_by_ri]
    print(f"cells: {len(report.cells)}  runs_per_cell: {cfg.runs_per_cell}")
    print(
        f"best_by_nmi: cell {best_nmi.cell_index} params {best_nmi.params} "
        f"mean {best_nmi.nmi_mean!r} var {best_nmi.nmi_var!r}"
    )
    print(
        f"best_by_ri: cell {best_ri.cell_index} params {best_ri.params} "
        f"mean {best_ri.ri_mean!r} var {best_ri.ri_var!r}"
    )
    if cfg.output_dir:
        print(f"report written to {cfg.output_dir}")
    return 0


def _cmd_stats(args) -> int:
    table = read_score_csv(args.scores, higher_is_better=not args.lower_is_better)
    fr = friedman(table, alpha=args.alpha)
    holm = holm_posthoc(fr)
    print(format_friedman(fr))
    print()
    print(format_holm(holm))
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_friedman_csv(fr, out / "friedman.csv")
        write_holm_csv(holm, out / "holm.csv")
        print(f"\ncsv written to {out}")
    return 0


def _cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n=args.n,
        c_true=args.c_true,
        r_true=args.r_true,
        view_dims=tuple(args.view_dims),
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    ds = generate_synthetic(spec)
    written = save_multiview(ds, args.output_dir)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvfuzz",
        description="Multi-view fuzzy clustering in a shared hidden space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="run one algorithm once and print metrics")
    fit.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    fit.add_argument("--views", nargs="+", help="one CSV per view, samples as rows")
    fit.add_argument("--labels", help="ground-truth labels, one integer per line")
    fit.add_argument("--header", action="store_true", help="skip a CSV header row")
    fit.add_argument("--synthetic", help="inline synthetic spec (YAML mapping)")
    fit.add_argument("--no-normalize", action="store_true")
    fit.add_argument("--clusters", type=int)
    fit.add_argument("--m", type=float, help="fuzzifier")
    fit.add_argument("--lam", type=float, help="reconstruction weight (hss)")
    fit.add_argument("--eta", type=float, help="entropy weight (hss) or exchange rate (cofkm)")
    fit.add_argument("--r", type=int, help="hidden rank")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--tol", type=float, default=1e-6)
    fit.add_argument("--t-max", type=int, default=1000)
    fit.add_argument("--h-inner-steps", type=int, default=1)
    fit.add_argument("--assignments-out", help="write hard labels to this file")
    fit.set_defaults(func=_cmd_fit)

    grid = sub.add_parser("grid", help="run a full experiment from a config file")
    grid.add_argument("--config", help="YAML config; flags override its keys")
    grid.add_argument("--algorithm", choices=ALGORITHMS)
    grid.add_argument("--views", nargs="+")
    grid.add_argument("--labels")
    grid.add_argument("--header", action="store_true")
    grid.add_argument("--synthetic")
    grid.add_argument("--no-normalize", action="store_true")
    grid.add_argument("--clusters", type=int)
    grid.add_argument("--grid", help="inline grid (YAML mapping of lists)")
    grid.add_argument("--runs-per-cell", type=int)
    grid.add_argument("--base-seed", type=int)
    grid.add_argument("--tol", type=float)
    grid.add_argument("--t-max", type=int)
    grid.add_argument("--h-inner-steps", type=int)
    grid.add_argument("--jobs", type=int)
    grid.add_argument("--output-dir")
    grid.set_defaults(func=_cmd_grid)

    stats = sub.add_parser("stats", help="Friedman and Holm tests on a score CSV")
    stats.add_argument("scores", help="CSV: header of algorithm names, datasets as rows")
    stats.add_argument("--alpha", type=float, default=0.05)
    stats.add_argument("--lower-is-better", action="store_true")
    stats.add_argument("--output-dir")
    stats.set_defaults(func=_cmd_stats)

    synth = sub.add_parser("synth", help="write a synthetic dataset to CSV files")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--c-true", type=int, required=True)
    synth.add_argument("--r-true", type=int, required=True)
    synth.add_argument("--view-dims", type=int, nargs="+", required=True)
    synth.add_argument("--noise-sigma", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--output-dir", required=True)
    synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MvfuzzError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())
