"""Mediation analysis for zero-inflated single-cell counts via pseudobulk co-mediators."""

from .data import (
    CellCountMatrix,
    GeneFilterReport,
    PseudobulkDataset,
    SubjectTable,
    aggregate_pseudobulk,
    clamp_zero_proportion,
    filter_degenerate_genes,
)
from .glm import (
    DesignMatrix,
    LassoFit,
    RegressionFit,
    build_design,
    fit_beta_regression,
    fit_lasso,
    fit_nb_regression,
    fit_ols,
    wald_pvalue,
)
from .pipeline import (
    AnalysisConfig,
    GeneMediationResult,
    MediationReport,
    ScreeningResult,
    bh_adjust,
    estimate_iie_f,
    estimate_iie_m,
    js_test,
    run_medzisc,
    run_naive,
    screen_mediators,
)
from .benchmark import (
    BenchmarkTable,
    ReplicateScore,
    run_benchmark,
    score_replicate,
)
from .simulate import (
    ScenarioConfig,
    SimulatedDataset,
    SimulationTruth,
    generate_replicate,
    sample_zinb,
    simulate_outcome,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "BenchmarkTable",
    "CellCountMatrix",
    "DesignMatrix",
    "GeneFilterReport",
    "GeneMediationResult",
    "LassoFit",
    "MediationReport",
    "PseudobulkDataset",
    "RegressionFit",
    "ReplicateScore",
    "ScenarioConfig",
    "ScreeningResult",
    "SimulatedDataset",
    "SimulationTruth",
    "SubjectTable",
    "aggregate_pseudobulk",
    "bh_adjust",
    "build_design",
    "clamp_zero_proportion",
    "estimate_iie_f",
    "estimate_iie_m",
    "filter_degenerate_genes",
    "fit_beta_regression",
    "fit_lasso",
    "fit_nb_regression",
    "fit_ols",
    "generate_replicate",
    "js_test",
    "run_benchmark",
    "run_medzisc",
    "run_naive",
    "sample_zinb",
    "score_replicate",
    "screen_mediators",
    "simulate_outcome",
    "wald_pvalue",
]
