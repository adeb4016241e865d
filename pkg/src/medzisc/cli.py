"""Command-line entry point: simulate, analyze, and benchmark subcommands.

All commands are non-interactive: progress goes to standard error, results
to files in the chosen output directory, each run accompanied by a manifest
that pins the resolved configuration, seed and input digests. Exit codes:
0 success, 1 runtime failure, 2 invalid input or configuration.
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .benchmark import evaluate_thresholds, expand_grid, run_benchmark
from .data import aggregate_pseudobulk, filter_degenerate_genes
from .exceptions import ConfigError, MedziscError, StructureError
from .pipeline import AnalysisConfig, run_medzisc, run_naive
from .simulate import generate_replicate

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


def _progress(message: str) -> None:
    print(message, file=sys.stderr, flush=True)


def _default_threads() -> int:
    raw = os.environ.get("MEDZISC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medzisc",
        description="Mediation analysis for zero-inflated single-cell counts "
        "via subject-level co-mediators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset from a scenario config")
    sim.add_argument("--config", required=True, help="scenario config JSON")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--replicate", type=int, default=0, help="replicate index to generate")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument(
        "--format",
        choices=("per-subject", "long"),
        default="per-subject",
        help="counts layout: one TSV per subject, or a single long-format TSV",
    )

    ana = sub.add_parser("analyze", help="run the mediation analysis on a dataset")
    ana.add_argument("--metadata", required=True, help="subject metadata TSV (subject_id, X, Z1..Zk, Y)")
    src = ana.add_argument_group("input data (choose one form)")
    src.add_argument("--counts-dir", help="directory of per-subject counts TSVs")
    src.add_argument("--counts-long", help="long-format counts TSV")
    src.add_argument("--mean-expression", help="pseudobulk mean-expression matrix TSV")
    src.add_argument("--zero-proportion", help="pseudobulk zero-proportion matrix TSV")
    src.add_argument("--gene-flags", help="optional gene flags TSV accompanying the matrices")
    ana.add_argument("--method", choices=("medzisc", "naive", "both"), default="medzisc")
    ana.add_argument("--analysis-config", help="analysis config JSON (flags override it)")
    ana.add_argument("--screening-rule", choices=("conjunction", "union"))
    ana.add_argument("--level", type=float, help="BH significance level (default 0.05)")
    ana.add_argument("--marginal-alpha", type=float, help="marginal screening level (default 0.05)")
    ana.add_argument("--contrast", nargs=2, type=float, metavar=("X1", "X2"))
    ana.add_argument(
        "--covariate-profile",
        help="comma-separated covariate values for the indirect-effect profile "
        "(default: sample mean)",
    )
    ana.add_argument("--lasso-lambda", type=float, help="fixed penalty instead of cross-validation")
    ana.add_argument("--cv-rule", choices=("1se", "min"))
    ana.add_argument("--naive-terms", choices=("separate", "joint"))
    ana.add_argument("--no-intercept", action="store_true", help="fit all models without intercepts")
    ana.add_argument("--seed", type=int, help="seed for cross-validation folds")
    ana.add_argument("--out", required=True, help="output directory")
    ana.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    ben = sub.add_parser("benchmark", help="run a scenario grid and score both methods")
    ben.add_argument("--grid", required=True, help="grid config JSON")
    ben.add_argument("--out", required=True, help="output directory")
    ben.add_argument(
        "--threads",
        type=int,
        default=_default_threads(),
        help="worker processes (default: MEDZISC_THREADS or 1)",
    )
    ben.add_argument("--per-replicate", action="store_true", help="also write per-replicate scores CSV")
    ben.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def cmd_simulate(args) -> int:
    config = io.read_scenario_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _progress(f"generating replicate {args.replicate} "
              f"(n={config.n_subjects}, c={config.cells_per_subject}, g={config.n_genes})")
    dataset = generate_replicate(config, args.replicate)
    if args.format == "per-subject":
        io.write_cell_counts_dir(out, dataset.cells)
    else:
        io.write_cell_counts_long(out / "counts_long.tsv", dataset.cells)
    io.write_subject_table(out / "metadata.tsv", dataset.subjects)
    io.write_truth(out / "truth.tsv", dataset.truth)
    manifest = io.build_manifest(
        "simulate",
        {"scenario": config.to_dict(), "replicate": args.replicate, "format": args.format},
        seed=config.seed,
        input_paths=[args.config],
    )
    io.write_manifest(out / "manifest.json", manifest)
    _progress(f"wrote dataset to {out}")
    return EXIT_OK


def _analysis_from_args(args) -> AnalysisConfig:
    base = {}
    if args.analysis_config:
        base = io.read_json(args.analysis_config)
    config = AnalysisConfig.from_dict(base)
    overrides = {}
    if args.screening_rule:
        overrides["screening_rule"] = args.screening_rule
    if args.level is not None:
        overrides["significance_level"] = args.level
    if args.marginal_alpha is not None:
        overrides["marginal_alpha"] = args.marginal_alpha
    if args.contrast is not None:
        overrides["contrast"] = tuple(args.contrast)
    if args.covariate_profile is not None:
        try:
            overrides["covariate_profile"] = tuple(
                float(v) for v in args.covariate_profile.split(",")
            )
        except ValueError:
            raise ConfigError("covariate profile must be comma-separated numbers") from None
    if args.lasso_lambda is not None:
        overrides["lasso_lambda"] = args.lasso_lambda
    if args.cv_rule:
        overrides["cv_rule"] = args.cv_rule
    if args.naive_terms:
        overrides["naive_terms"] = args.naive_terms
    if args.no_intercept:
        overrides["include_intercept"] = False
    if args.seed is not None:
        overrides["seed"] = args.seed
    return replace(config, **overrides) if overrides else config


def _load_analysis_inputs(args):
    subjects = io.read_subject_table(args.metadata)
    subjects.require_outcome()
    inputs = [args.metadata]
    matrix_mode = args.mean_expression or args.zero_proportion
    if matrix_mode:
        if not (args.mean_expression and args.zero_proportion):
            raise ConfigError(
                "matrix input needs both --mean-expression and --zero-proportion"
            )
        if args.counts_dir or args.counts_long:
            raise ConfigError("give either cell counts or pseudobulk matrices, not both")
        dataset = io.read_pseudobulk(
            args.mean_expression, args.zero_proportion, subjects, flags_path=args.gene_flags
        )
        inputs += [args.mean_expression, args.zero_proportion]
        if args.gene_flags:
            inputs.append(args.gene_flags)
    elif args.counts_dir:
        cells = io.read_cell_counts_dir(args.counts_dir, subjects)
        dataset = aggregate_pseudobulk(cells, subjects)
    elif args.counts_long:
        cells = io.read_cell_counts_long(args.counts_long, subjects)
        dataset = aggregate_pseudobulk(cells, subjects)
        inputs.append(args.counts_long)
    else:
        raise ConfigError(
            "no input data: give --counts-dir, --counts-long, or the pseudobulk matrices"
        )
    dataset, filter_report = filter_degenerate_genes(dataset)
    if filter_report.removed_all_zero:
        _progress(
            f"removed {len(filter_report.removed_all_zero)} genes with no expression"
        )
    return dataset, inputs


def cmd_analyze(args) -> int:
    config = _analysis_from_args(args)
    dataset, inputs = _load_analysis_inputs(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    methods = ("medzisc", "naive") if args.method == "both" else (args.method,)
    runners = {"medzisc": run_medzisc, "naive": run_naive}
    for method in methods:
        _progress(f"running {method} on {dataset.n_subjects} subjects x {dataset.n_genes} genes")
        report = runners[method](dataset, config)
        io.write_report_json(out / f"report_{method}.json", report)
        io.write_report_tsv(out / f"report_{method}.tsv", report)
        if not args.no_figures:
            from .plots import render_report_figure

            render_report_figure(report, out / f"report_{method}.png")
        n_sig = len(report.significant_genes("M")) + len(report.significant_genes("F"))
        _progress(f"{method}: {n_sig} significant pathway hits")
    manifest = io.build_manifest(
        "analyze",
        {"analysis": config.to_dict(), "methods": list(methods)},
        seed=config.seed,
        input_paths=inputs,
    )
    io.write_manifest(out / "manifest.json", manifest)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    grid_raw = io.read_json(args.grid)
    configs, methods, analysis, thresholds = expand_grid(grid_raw)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    total = sum(c.replicate_count for c in configs)
    _progress(
        f"benchmark: {len(configs)} cells x {list(methods)} methods, "
        f"{total} replicates, {args.threads} worker(s)"
    )
    done = {"count": 0}

    def progress(cell, rep):
        done["count"] += 1
        _progress(f"  [{done['count']}/{total}] cell {cell} replicate {rep} finished")

    table = run_benchmark(
        configs, methods=methods, analysis=analysis, threads=args.threads, progress=progress
    )
    paths = io.write_benchmark_table(out, table, per_replicate=args.per_replicate)
    if not args.no_figures:
        from .plots import render_benchmark_figure

        render_benchmark_figure(table, out / "benchmark.png")
    manifest = io.build_manifest(
        "benchmark",
        {
            "grid": grid_raw,
            "methods": list(methods),
            "analysis": analysis.to_dict(),
            "threads": args.threads,
        },
        seed=[c.seed for c in configs],
        input_paths=[args.grid],
    )
    io.write_manifest(out / "manifest.json", manifest)
    for cell, rep, method, message in table.failures:
        _progress(f"replicate failure: cell {cell} rep {rep} {method}: {message}")
    violations = evaluate_thresholds(table, thresholds)
    for v in violations:
        _progress(f"threshold violation: {v}")
    _progress(f"wrote benchmark outputs to {out}")
    return EXIT_RUNTIME if violations else EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("MEDZISC_LOGLEVEL", "WARNING"),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "analyze": cmd_analyze,
        "benchmark": cmd_benchmark,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, StructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MedziscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
