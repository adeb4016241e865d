"""Figure rendering for analysis reports and benchmark tables.

Figures are written straight to files next to the delimited outputs; the
Agg backend keeps everything headless.
"""

import matplotlib

matplotlib.use("Agg")

import numpy as np
import matplotlib.pyplot as plt

from .benchmark import BenchmarkTable
from .pipeline import MediationReport


def _pathway_panel(ax, entries, level, title):
    if not entries:
        ax.text(0.5, 0.5, "no genes tested", ha="center", va="center", transform=ax.transAxes)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(title)
        return
    iie = np.array([e.iie for e in entries])
    padj = np.array([max(e.p_adjusted, 1e-300) for e in entries])
    sig = np.array([e.significant for e in entries])
    neglog = -np.log10(padj)
    ax.scatter(iie[~sig], neglog[~sig], s=18, c="0.6", label="not significant")
    if sig.any():
        ax.scatter(iie[sig], neglog[sig], s=26, c="crimson", label="significant")
        for e, x, y in zip(np.array(entries)[sig], iie[sig], neglog[sig]):
            ax.annotate(e.gene, (x, y), fontsize=7, xytext=(2, 2), textcoords="offset points")
    ax.axhline(-np.log10(level), color="steelblue", ls="--", lw=0.8)
    ax.set_xlabel("indirect effect")
    ax.set_ylabel("-log10 adjusted p")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=7)


def render_report_figure(report: MediationReport, path) -> None:
    """Two-panel indirect-effect overview, one panel per mediator family."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    _pathway_panel(axes[0], list(report.m_results), report.significance_level, "mean-expression pathway")
    _pathway_panel(axes[1], list(report.f_results), report.significance_level, "zero-proportion pathway")
    fig.suptitle(f"{report.method}: indirect effects at contrast {report.contrast}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_benchmark_figure(table: BenchmarkTable, path) -> None:
    """Grouped bars of power and FDR per scenario cell and method."""
    rows = list(table.rows)
    if not rows:
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.text(0.5, 0.5, "empty benchmark", ha="center", va="center", transform=ax.transAxes)
        fig.savefig(path, dpi=150)
        plt.close(fig)
        return
    cells = sorted({(r.n_subjects, r.cells_per_subject, r.n_genes) for r in rows})
    methods = list(dict.fromkeys(r.method for r in rows))
    metrics = ("power_m", "power_f", "fdr_m", "fdr_f")
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    x = np.arange(len(cells))
    width = 0.8 / max(len(methods), 1)
    for ax, metric in zip(axes.ravel(), metrics):
        for mi, method in enumerate(methods):
            vals = []
            for cell in cells:
                row = next(
                    (
                        r
                        for r in rows
                        if (r.n_subjects, r.cells_per_subject, r.n_genes) == cell
                        and r.method == method
                    ),
                    None,
                )
                vals.append(np.nan if row is None else getattr(row, metric))
            ax.bar(x + mi * width, vals, width, label=method)
        if metric.startswith("fdr"):
            ax.axhline(0.05, color="0.4", ls="--", lw=0.8)
        ax.set_ylabel(metric)
        ax.set_xticks(x + width * (len(methods) - 1) / 2)
        ax.set_xticklabels([f"n={n}\nc={c}\ng={g}" for n, c, g in cells], fontsize=8)
        ax.set_ylim(0, 1.05)
    axes[0, 0].legend(fontsize=8)
    fig.suptitle("benchmark summary")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
