"""Replicate scoring against ground truth and scenario-grid benchmarking.

Power is the fraction of true mediators recovered per family; the false
discovery rate is the fraction of declared genes that are not true
mediators, taken as 0 when nothing is declared. A grid run generates
replicates, applies each method, scores them, and averages per
(n, c, g, method) cell. Replicates are pure functions of (config,
replicate index), so worker pools of any size produce identical tables.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import aggregate_pseudobulk
from .exceptions import ConfigError
from .pipeline import AnalysisConfig, MediationReport, run_medzisc, run_naive
from .simulate import ScenarioConfig, SimulationTruth, generate_replicate

METHODS = ("medzisc", "naive")


@dataclass(frozen=True)
class ReplicateScore:
    """Per-replicate, per-method confusion summary."""

    replicate: int
    method: str
    power_m: float  # NaN when the family has no true mediators
    power_f: float
    fdr_m: float
    fdr_f: float
    discoveries_m: int
    discoveries_f: int
    seconds: float

    def to_dict(self) -> dict:
        return {
            "replicate": self.replicate,
            "method": self.method,
            "power_m": self.power_m,
            "power_f": self.power_f,
            "fdr_m": self.fdr_m,
            "fdr_f": self.fdr_f,
            "discoveries_m": self.discoveries_m,
            "discoveries_f": self.discoveries_f,
            "seconds": self.seconds,
        }


@dataclass(frozen=True)
class BenchmarkRow:
    """One (scenario cell, method) row of averaged scores."""

    n_subjects: int
    cells_per_subject: int
    n_genes: int
    method: str
    power_m: float
    power_f: float
    fdr_m: float
    fdr_f: float
    mean_seconds: float
    n_replicates: int
    n_failed: int

    def to_dict(self) -> dict:
        return {
            "n_subjects": self.n_subjects,
            "cells_per_subject": self.cells_per_subject,
            "n_genes": self.n_genes,
            "method": self.method,
            "power_m": self.power_m,
            "power_f": self.power_f,
            "fdr_m": self.fdr_m,
            "fdr_f": self.fdr_f,
            "mean_seconds": self.mean_seconds,
            "n_replicates": self.n_replicates,
            "n_failed": self.n_failed,
        }


@dataclass(frozen=True)
class BenchmarkTable:
    """Averaged grid results plus the raw per-replicate scores and failures."""

    rows: tuple
    raw_scores: tuple  # (cell_index, ReplicateScore)
    failures: tuple  # (cell_index, replicate, method, message)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "failures": [
                {"cell": c, "replicate": r, "method": m, "error": e}
                for c, r, m, e in self.failures
            ],
        }


def _mean_defined(values) -> float:
    """Mean over the defined entries; NaN when the metric is undefined everywhere."""
    arr = np.asarray(values, dtype=float)
    defined = arr[np.isfinite(arr)]
    return float(defined.mean()) if defined.size else float("nan")


def _family_score(declared, truth_family):
    declared = set(declared)
    truth_family = set(truth_family)
    tp = len(declared & truth_family)
    fp = len(declared) - tp
    power = np.nan if not truth_family else tp / len(truth_family)
    fdr = 0.0 if not declared else fp / len(declared)
    return power, fdr, len(declared)


def score_replicate(
    report: MediationReport, truth: SimulationTruth, replicate: int = 0
) -> ReplicateScore:
    """Confusion-matrix summary of one report against the generating truth."""
    power_m, fdr_m, disc_m = _family_score(report.significant_genes("M"), truth.m_family)
    power_f, fdr_f, disc_f = _family_score(report.significant_genes("F"), truth.f_family)
    return ReplicateScore(
        replicate=replicate,
        method=report.method,
        power_m=power_m,
        power_f=power_f,
        fdr_m=fdr_m,
        fdr_f=fdr_f,
        discoveries_m=disc_m,
        discoveries_f=disc_f,
        seconds=report.elapsed_seconds,
    )


def _analysis_for(config: ScenarioConfig, replicate: int, analysis: AnalysisConfig) -> AnalysisConfig:
    # Per-replicate CV fold seed derived from the scenario seed; keeps the
    # whole benchmark a function of the grid file alone.
    derived = int(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(replicate, 4)).generate_state(1)[0]
    )
    return replace(analysis, seed=derived)


def run_cell_replicate(
    config: ScenarioConfig,
    replicate: int,
    methods=METHODS,
    analysis: AnalysisConfig | None = None,
):
    """Generate one replicate and score every requested method on it.

    Returns (scores, errors): scores is a list of ReplicateScore, errors a
    list of (method, message) for methods that failed on this replicate.
    """
    analysis = analysis or AnalysisConfig()
    analysis = _analysis_for(config, replicate, analysis)
    dataset = generate_replicate(config, replicate)
    pseudobulk = aggregate_pseudobulk(dataset.cells, dataset.subjects)
    runners = {"medzisc": run_medzisc, "naive": run_naive}
    scores = []
    errors = []
    for method in methods:
        if method not in runners:
            raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
        try:
            report = runners[method](pseudobulk, analysis)
            scores.append(score_replicate(report, dataset.truth, replicate))
        except Exception as exc:  # record and keep the grid running
            errors.append((method, f"{type(exc).__name__}: {exc}"))
    return scores, errors


def _job(args):
    cell_index, config, replicate, methods, analysis = args
    scores, errors = run_cell_replicate(config, replicate, methods, analysis)
    return cell_index, replicate, scores, errors


def run_benchmark(
    grid,
    methods=METHODS,
    analysis: AnalysisConfig | None = None,
    threads: int = 1,
    progress=None,
) -> BenchmarkTable:
    """Run every (cell, replicate, method) combination and average the scores.

    ``grid`` is a sequence of ScenarioConfig; each contributes
    ``replicate_count`` replicates. ``threads`` bounds the worker-process
    pool; any value yields identical statistical output because results are
    reduced in (cell, replicate) order.
    """
    grid = list(grid)
    methods = tuple(methods)
    analysis = analysis or AnalysisConfig()
    jobs = [
        (ci, config, rep, methods, analysis)
        for ci, config in enumerate(grid)
        for rep in range(config.replicate_count)
    ]

    results = {}
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for cell_index, rep, scores, errors in pool.map(_job, jobs, chunksize=1):
                results[(cell_index, rep)] = (scores, errors)
                if progress is not None:
                    progress(cell_index, rep)
    else:
        for args in jobs:
            cell_index, rep, scores, errors = _job(args)
            results[(cell_index, rep)] = (scores, errors)
            if progress is not None:
                progress(cell_index, rep)

    rows = []
    raw: list = []
    failures: list = []
    for ci, config in enumerate(grid):
        per_method = {m: [] for m in methods}
        for rep in range(config.replicate_count):
            scores, errors = results[(ci, rep)]
            for score in scores:
                per_method[score.method].append(score)
                raw.append((ci, score))
            for method, message in errors:
                failures.append((ci, rep, method, message))
        for method in methods:
            scores = per_method[method]
            n_failed = config.replicate_count - len(scores)
            if scores:
                power_m = _mean_defined([s.power_m for s in scores])
                power_f = _mean_defined([s.power_f for s in scores])
                fdr_m = float(np.mean([s.fdr_m for s in scores]))
                fdr_f = float(np.mean([s.fdr_f for s in scores]))
                secs = float(np.mean([s.seconds for s in scores]))
            else:
                power_m = power_f = fdr_m = fdr_f = secs = np.nan
            rows.append(
                BenchmarkRow(
                    n_subjects=config.n_subjects,
                    cells_per_subject=config.cells_per_subject,
                    n_genes=config.n_genes,
                    method=method,
                    power_m=power_m,
                    power_f=power_f,
                    fdr_m=fdr_m,
                    fdr_f=fdr_f,
                    mean_seconds=secs,
                    n_replicates=len(scores),
                    n_failed=n_failed,
                )
            )
    return BenchmarkTable(rows=tuple(rows), raw_scores=tuple(raw), failures=tuple(failures))


def expand_grid(raw: dict):
    """Expand a grid file dict into (configs, methods, analysis, thresholds).

    The grid file follows the scenario schema, except that ``n_subjects``,
    ``cells_per_subject`` and ``n_genes`` may be lists (their product spans
    the grid), and the extra keys ``methods``, ``analysis`` and
    ``thresholds`` configure the run.
    """
    raw = dict(raw)
    methods = tuple(raw.pop("methods", METHODS))
    analysis = AnalysisConfig.from_dict(raw.pop("analysis", {}))
    thresholds = raw.pop("thresholds", [])
    axes = {}
    for key in ("n_subjects", "cells_per_subject", "n_genes"):
        value = raw.get(key)
        if value is None:
            raise ConfigError(f"grid file must set {key}")
        axes[key] = list(value) if isinstance(value, (list, tuple)) else [value]
    configs = []
    for n in axes["n_subjects"]:
        for c in axes["cells_per_subject"]:
            for g in axes["n_genes"]:
                cell = dict(raw)
                cell.update(n_subjects=n, cells_per_subject=c, n_genes=g)
                configs.append(ScenarioConfig.from_dict(cell))
    _validate_thresholds(thresholds)
    return configs, methods, analysis, thresholds


_THRESHOLD_METRICS = ("power_m", "power_f", "fdr_m", "fdr_f")


def _validate_thresholds(thresholds):
    for t in thresholds:
        if t.get("metric") not in _THRESHOLD_METRICS:
            raise ConfigError(
                f"threshold metric must be one of {_THRESHOLD_METRICS}, got {t.get('metric')!r}"
            )
        if "min" not in t and "max" not in t:
            raise ConfigError("each threshold needs a min or a max bound")


def evaluate_thresholds(table: BenchmarkTable, thresholds) -> list:
    """Return human-readable violations of the grid file's acceptance bounds."""
    violations = []
    for t in thresholds:
        metric = t["metric"]
        for row in table.rows:
            if t.get("method") is not None and row.method != t["method"]:
                continue
            for key, attr in (
                ("n", "n_subjects"),
                ("c", "cells_per_subject"),
                ("g", "n_genes"),
            ):
                if t.get(key) is not None and getattr(row, attr) != t[key]:
                    break
            else:
                value = getattr(row, metric)
                label = (
                    f"{row.method} at n={row.n_subjects} c={row.cells_per_subject} "
                    f"g={row.n_genes}: {metric}={value:.4f}"
                )
                if "min" in t and not value >= t["min"]:
                    violations.append(f"{label} below required minimum {t['min']}")
                if "max" in t and not value <= t["max"]:
                    violations.append(f"{label} above allowed maximum {t['max']}")
    return violations
