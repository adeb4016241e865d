"""Real-data-shaped ingestion: pre-aggregated matrices at cohort scale.

Builds synthetic pseudobulk files shaped like a subjects x genes cohort
export (50 x 500, real-valued entries with exact zeros preserved), pushes
them through the matrix ingestion path and a full analysis run.
"""

import numpy as np
import pytest

from medzisc import io
from medzisc.data import SubjectTable, filter_degenerate_genes
from medzisc.pipeline import AnalysisConfig, run_medzisc


@pytest.fixture(scope="module")
def cohort_files(tmp_path_factory):
    rng = np.random.default_rng(314)
    n, g = 50, 500
    x = (rng.random(n) < 0.5).astype(float)
    z = rng.standard_normal((n, 1))
    # Normalized-expression-like values: lognormal with a point mass at zero.
    mean_expr = rng.lognormal(0.0, 0.6, (n, g))
    mean_expr[rng.random((n, g)) < 0.1] = 0.0
    mean_expr[:, 0] *= np.exp(0.8 * x)  # exposure-shifted gene
    zero_prop = rng.beta(6, 3, (n, g))
    zero_prop[:, 0] = rng.beta(6, 3, n) * (1 - 0.3 * x) + 0.3 * x * rng.beta(9, 2, n)
    # A couple of degenerate genes the filter must handle.
    mean_expr[:, 1] = 0.0
    zero_prop[:, 2] = 0.0
    y = 2.0 * x + 0.4 * z[:, 0] + 1.5 * mean_expr[:, 0] + 0.3 * rng.standard_normal(n)
    subjects = SubjectTable(
        [f"p{i:03d}" for i in range(n)], exposure=x, covariates=z, outcome=y,
        covariate_names=("Z1",),
    )
    root = tmp_path_factory.mktemp("cohort")
    meta = root / "metadata.tsv"
    io.write_subject_table(meta, subjects)
    from medzisc.data import PseudobulkDataset, clamp_zero_proportion

    pb = PseudobulkDataset(
        subjects=subjects,
        mean_expr=mean_expr,
        zero_prop=clamp_zero_proportion(zero_prop),
        gene_names=tuple(f"ENSG{j:05d}" for j in range(g)),
        f_modeled=np.ones(g, dtype=bool),
    )
    paths = io.write_pseudobulk(root, pb)
    return meta, paths, pb


class TestCohortIngestion:
    def test_matrices_roundtrip_at_scale(self, cohort_files):
        meta, paths, pb = cohort_files
        subjects = io.read_subject_table(meta)
        ds = io.read_pseudobulk(
            paths["mean_expression"], paths["zero_proportion"], subjects,
            flags_path=paths["gene_flags"],
        )
        assert ds.n_subjects == 50
        assert ds.n_genes == 500
        np.testing.assert_allclose(ds.mean_expr, pb.mean_expr)

    def test_filter_handles_degenerate_genes(self, cohort_files):
        meta, paths, pb = cohort_files
        subjects = io.read_subject_table(meta)
        ds = io.read_pseudobulk(
            paths["mean_expression"], paths["zero_proportion"], subjects,
        )
        filtered, report = filter_degenerate_genes(ds)
        assert "ENSG00001" in report.removed_all_zero
        assert "ENSG00002" in report.zero_prop_degenerate
        assert filtered.n_genes == 499

    def test_analysis_runs_end_to_end(self, cohort_files):
        meta, paths, pb = cohort_files
        subjects = io.read_subject_table(meta)
        ds = io.read_pseudobulk(
            paths["mean_expression"], paths["zero_proportion"], subjects,
        )
        # Fixed penalty keeps this cohort-scale smoke test quick.
        report = run_medzisc(ds, AnalysisConfig(lasso_lambda=0.05, seed=1))
        assert report.method == "medzisc"
        assert np.isfinite(report.direct_effect)
        for entry in report.m_results + report.f_results:
            assert 0.0 <= entry.p_max <= 1.0
