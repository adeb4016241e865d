"""File formats: TSV matrices and tables, JSON configs, reports and manifests.

All tabular formats are tab-separated with a header row; readers accept
gzip-compressed files transparently (any path ending in .gz). Column-level
schemas are documented in the README.
"""

import gzip
import hashlib
import json
import platform
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from .benchmark import BenchmarkTable
from .data import (
    CellCountMatrix,
    PseudobulkDataset,
    SubjectTable,
    clamp_zero_proportion,
)
from .exceptions import ConfigError, StructureError
from .pipeline import AnalysisConfig, MediationReport
from .simulate import ScenarioConfig, SimulationTruth

ARTIFACT_VERSION = "0.1.0"

METADATA_COLUMNS = ("subject_id", "X")
LONG_COLUMNS = ("subject_id", "cell_id", "gene", "count")


def _read_table(path) -> pd.DataFrame:
    # round_trip parsing keeps written doubles bit-exact through a cycle
    return pd.read_csv(
        path,
        sep="\t",
        dtype={"subject_id": str},
        compression="infer",
        float_precision="round_trip",
    )


def _open_write(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "wt", newline="")
    return open(path, "w", newline="")


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_tsv(path, header, rows) -> None:
    with _open_write(path) as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_format(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Subject metadata
# ---------------------------------------------------------------------------

def read_subject_table(path) -> SubjectTable:
    """Metadata TSV: subject_id, X, Z1..Zk, and optionally Y."""
    df = _read_table(path)
    missing = [c for c in METADATA_COLUMNS if c not in df.columns]
    if missing:
        raise StructureError(
            f"metadata file {path} is missing required columns: {', '.join(missing)}"
        )
    z_cols = [c for c in df.columns if c.startswith("Z") and c[1:].isdigit()]
    z_cols.sort(key=lambda c: int(c[1:]))
    if not z_cols:
        raise StructureError(f"metadata file {path} has no covariate columns Z1..Zk")
    outcome = df["Y"].to_numpy(dtype=float) if "Y" in df.columns else None
    return SubjectTable(
        subject_ids=df["subject_id"].tolist(),
        exposure=df["X"].to_numpy(dtype=float),
        covariates=df[z_cols].to_numpy(dtype=float),
        outcome=outcome,
        covariate_names=tuple(z_cols),
    )


def write_subject_table(path, subjects: SubjectTable) -> None:
    header = ["subject_id", "X", *subjects.covariate_names]
    if subjects.outcome is not None:
        header.append("Y")
    rows = []
    for i, sid in enumerate(subjects.subject_ids):
        row = [sid, subjects.exposure[i], *subjects.covariates[i]]
        if subjects.outcome is not None:
            row.append(subjects.outcome[i])
        rows.append(row)
    write_tsv(path, header, rows)


# ---------------------------------------------------------------------------
# Cell counts
# ---------------------------------------------------------------------------

def write_cell_counts_dir(out_dir, cells) -> list:
    """One counts TSV per subject: first column cell_id, then one column per gene."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for cm in cells:
        path = out_dir / f"counts_{cm.subject_id}.tsv"
        header = ["cell_id", *cm.gene_names]
        rows = (
            [f"cell_{i + 1:05d}", *cm.counts[i]] for i in range(cm.n_cells)
        )
        write_tsv(path, header, rows)
        written.append(path)
    return written


def read_cell_counts_dir(counts_dir, subjects: SubjectTable) -> list:
    """Read per-subject counts files named counts_<subject_id>.tsv[.gz]."""
    counts_dir = Path(counts_dir)
    cells = []
    missing = []
    for sid in subjects.subject_ids:
        path = counts_dir / f"counts_{sid}.tsv"
        if not path.exists():
            gz = path.with_suffix(".tsv.gz")
            if gz.exists():
                path = gz
            else:
                missing.append(sid)
                continue
        df = _read_table(path)
        if "cell_id" not in df.columns:
            raise StructureError(f"{path} lacks the cell_id column")
        genes = tuple(c for c in df.columns if c != "cell_id")
        cells.append(
            CellCountMatrix(sid, df[list(genes)].to_numpy(dtype=float), genes)
        )
    if missing:
        raise StructureError(
            "no counts file for subjects: " + ", ".join(missing)
        )
    return cells


def write_cell_counts_long(path, cells) -> None:
    """Sparse long format: subject_id, cell_id, gene, count (zeros omitted)."""
    with _open_write(path) as fh:
        fh.write("\t".join(LONG_COLUMNS) + "\n")
        for cm in cells:
            nz_cells, nz_genes = np.nonzero(cm.counts)
            for ci, gj in zip(nz_cells, nz_genes):
                fh.write(
                    f"{cm.subject_id}\tcell_{ci + 1:05d}\t{cm.gene_names[gj]}\t"
                    f"{_format(cm.counts[ci, gj])}\n"
                )


def read_cell_counts_long(path, subjects: SubjectTable) -> list:
    """Long-format counts; absent (cell, gene) pairs are zeros.

    The gene universe is the sorted set of genes appearing anywhere in the
    file; every subject must appear.
    """
    df = _read_table(path)
    missing_cols = [c for c in LONG_COLUMNS if c not in df.columns]
    if missing_cols:
        raise StructureError(
            f"long counts file {path} is missing columns: {', '.join(missing_cols)}"
        )
    genes = tuple(sorted(df["gene"].astype(str).unique()))
    gene_index = {g: j for j, g in enumerate(genes)}
    cells = []
    grouped = dict(tuple(df.groupby("subject_id", sort=False)))
    unknown = set(grouped) - set(subjects.subject_ids)
    if unknown:
        raise StructureError(
            "counts reference unknown subjects: " + ", ".join(sorted(unknown))
        )
    missing = [sid for sid in subjects.subject_ids if sid not in grouped]
    if missing:
        raise StructureError("no counts for subjects: " + ", ".join(missing))
    for sid in subjects.subject_ids:
        sub = grouped[sid]
        cell_ids = list(dict.fromkeys(sub["cell_id"].astype(str)))
        cell_index = {c: i for i, c in enumerate(cell_ids)}
        counts = np.zeros((len(cell_ids), len(genes)))
        rows = sub["cell_id"].astype(str).map(cell_index).to_numpy()
        cols = sub["gene"].astype(str).map(gene_index).to_numpy()
        counts[rows, cols] = sub["count"].to_numpy(dtype=float)
        cells.append(CellCountMatrix(sid, counts, genes))
    return cells


# ---------------------------------------------------------------------------
# Pseudobulk matrices
# ---------------------------------------------------------------------------

def _write_matrix(path, matrix, subjects, gene_names):
    header = ["subject_id", *gene_names]
    rows = ([sid, *matrix[i]] for i, sid in enumerate(subjects.subject_ids))
    write_tsv(path, header, rows)


def write_pseudobulk(out_dir, dataset: PseudobulkDataset) -> dict:
    """Mean-expression and zero-proportion matrices plus per-gene flags."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "mean_expression": out_dir / "mean_expression.tsv",
        "zero_proportion": out_dir / "zero_proportion.tsv",
        "gene_flags": out_dir / "gene_flags.tsv",
    }
    _write_matrix(paths["mean_expression"], dataset.mean_expr, dataset.subjects, dataset.gene_names)
    _write_matrix(paths["zero_proportion"], dataset.zero_prop, dataset.subjects, dataset.gene_names)
    write_tsv(
        paths["gene_flags"],
        ["gene", "f_modeled"],
        ((g, bool(fm)) for g, fm in zip(dataset.gene_names, dataset.f_modeled)),
    )
    return paths


def _read_matrix(path, subjects: SubjectTable):
    df = _read_table(path)
    if "subject_id" not in df.columns:
        raise StructureError(f"{path} lacks the subject_id column")
    file_ids = df["subject_id"].tolist()
    mismatch = set(file_ids).symmetric_difference(subjects.subject_ids)
    if mismatch:
        raise StructureError(
            f"{path}: subjects do not match the metadata; offending ids: "
            + ", ".join(sorted(mismatch))
        )
    df = df.set_index("subject_id").loc[list(subjects.subject_ids)]
    genes = tuple(df.columns)
    return df.to_numpy(dtype=float), genes


def read_pseudobulk(mean_path, zero_path, subjects: SubjectTable, flags_path=None) -> PseudobulkDataset:
    """Assemble a pseudobulk dataset from matrix files, clamping proportions."""
    mean_expr, genes_m = _read_matrix(mean_path, subjects)
    zero_prop, genes_f = _read_matrix(zero_path, subjects)
    if genes_m != genes_f:
        raise StructureError("mean and zero-proportion matrices list different genes")
    zero_prop = clamp_zero_proportion(zero_prop)
    if flags_path is not None:
        flags = _read_table(flags_path)
        if not {"gene", "f_modeled"} <= set(flags.columns):
            raise StructureError(f"{flags_path} needs columns gene and f_modeled")
        lookup = dict(zip(flags["gene"].astype(str), flags["f_modeled"]))
        missing = [g for g in genes_m if g not in lookup]
        if missing:
            raise StructureError(
                "gene flags missing for: " + ", ".join(missing[:5])
            )
        f_modeled = np.array(
            [str(lookup[g]).strip().lower() in ("true", "1") for g in genes_m]
        )
    else:
        f_modeled = np.ones(len(genes_m), dtype=bool)
    return PseudobulkDataset(
        subjects=subjects,
        mean_expr=mean_expr,
        zero_prop=zero_prop,
        gene_names=genes_m,
        f_modeled=f_modeled,
    )


# ---------------------------------------------------------------------------
# Simulation truth
# ---------------------------------------------------------------------------

def write_truth(path, truth: SimulationTruth) -> None:
    header = ["gene", "mediator_type", "alpha_x", "gamma_x", "beta_m", "beta_f", "dispersion"]
    rows = (
        (
            truth.gene_names[j],
            truth.mediator_type[j],
            truth.alpha_x[j],
            truth.gamma_x[j],
            truth.beta_m[j],
            truth.beta_f[j],
            truth.dispersion[j],
        )
        for j in range(len(truth.gene_names))
    )
    write_tsv(path, header, rows)


def read_truth(path) -> SimulationTruth:
    df = _read_table(path)
    required = {"gene", "mediator_type", "alpha_x", "gamma_x", "beta_m", "beta_f", "dispersion"}
    missing = required - set(df.columns)
    if missing:
        raise StructureError(f"truth file {path} is missing columns: {', '.join(sorted(missing))}")
    return SimulationTruth(
        gene_names=tuple(df["gene"].astype(str)),
        mediator_type=tuple(df["mediator_type"].astype(str)),
        alpha_x=df["alpha_x"].to_numpy(dtype=float),
        gamma_x=df["gamma_x"].to_numpy(dtype=float),
        beta_m=df["beta_m"].to_numpy(dtype=float),
        beta_f=df["beta_f"].to_numpy(dtype=float),
        dispersion=df["dispersion"].to_numpy(dtype=float),
    )


# ---------------------------------------------------------------------------
# Reports and benchmark tables
# ---------------------------------------------------------------------------

REPORT_COLUMNS = (
    "gene",
    "pathway",
    "path_coef",
    "path_se",
    "exposure_coef",
    "exposure_se",
    "iie",
    "iie_subject_avg",
    "p_path",
    "p_exposure",
    "p_max",
    "p_adjusted",
    "significant",
)


def write_report_tsv(path, report: MediationReport) -> None:
    rows = (
        tuple(getattr(entry, col) for col in REPORT_COLUMNS)
        for entry in (*report.m_results, *report.f_results)
    )
    write_tsv(path, REPORT_COLUMNS, rows)


def write_report_json(path, report: MediationReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, allow_nan=True)
        fh.write("\n")


BENCH_STAT_COLUMNS = (
    "n_subjects",
    "cells_per_subject",
    "n_genes",
    "method",
    "power_m",
    "power_f",
    "fdr_m",
    "fdr_f",
    "n_replicates",
    "n_failed",
)


def write_benchmark_table(out_dir, table: BenchmarkTable, per_replicate: bool = False) -> dict:
    """Statistical table, JSON dump with timings, separate timing TSV.

    Wall-clock timings are kept out of the main TSV so that the statistical
    table is byte-reproducible for a fixed seed regardless of hardware or
    worker count.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "table": out_dir / "benchmark_table.tsv",
        "timings": out_dir / "benchmark_timings.tsv",
        "json": out_dir / "benchmark_table.json",
    }
    write_tsv(
        paths["table"],
        BENCH_STAT_COLUMNS,
        (tuple(getattr(r, c) for c in BENCH_STAT_COLUMNS) for r in table.rows),
    )
    write_tsv(
        paths["timings"],
        ("n_subjects", "cells_per_subject", "n_genes", "method", "mean_seconds"),
        (
            (r.n_subjects, r.cells_per_subject, r.n_genes, r.method, r.mean_seconds)
            for r in table.rows
        ),
    )
    payload = table.to_dict()
    payload["hardware"] = {
        "platform": platform.platform(),
        "python": platform.python_version(),
    }
    with open(paths["json"], "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)
        fh.write("\n")
    if per_replicate:
        paths["per_replicate"] = out_dir / "benchmark_replicates.csv"
        header = (
            "cell",
            "replicate",
            "method",
            "power_m",
            "power_f",
            "fdr_m",
            "fdr_f",
            "discoveries_m",
            "discoveries_f",
            "seconds",
        )
        with open(paths["per_replicate"], "w") as fh:
            fh.write(",".join(header) + "\n")
            for cell, score in table.raw_scores:
                d = score.to_dict()
                fh.write(
                    ",".join(
                        [str(cell)]
                        + [_format(d[c]) for c in header[1:]]
                    )
                    + "\n"
                )
    return paths


# ---------------------------------------------------------------------------
# Configs and the run manifest
# ---------------------------------------------------------------------------

def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None


def read_scenario_config(path) -> ScenarioConfig:
    return ScenarioConfig.from_dict(read_json(path))


def read_analysis_config(path) -> AnalysisConfig:
    return AnalysisConfig.from_dict(read_json(path))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command: str, resolved_config: dict, seed, input_paths=()) -> dict:
    """Everything needed to reproduce a run: command, materialized config,
    seed, artifact version, and digests of all input files."""
    return {
        "command": command,
        "config": resolved_config,
        "seed": seed,
        "artifact_version": ARTIFACT_VERSION,
        "inputs": {
            str(p): file_digest(p) for p in input_paths
        },
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
