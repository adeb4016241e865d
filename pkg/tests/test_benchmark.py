"""Scoring arithmetic against a brute-force confusion oracle, plus grid runs."""

import numpy as np
import pytest

from medzisc.benchmark import (
    BenchmarkTable,
    ReplicateScore,
    evaluate_thresholds,
    expand_grid,
    run_benchmark,
    run_cell_replicate,
    score_replicate,
)
from medzisc.exceptions import ConfigError
from medzisc.glm import RegressionFit
from medzisc.pipeline import GeneMediationResult, MediationReport
from medzisc.simulate import ScenarioConfig, SimulationTruth


def make_truth(gene_types):
    genes = tuple(f"g{i}" for i in range(len(gene_types)))
    g = len(genes)
    return SimulationTruth(
        gene_names=genes,
        mediator_type=tuple(gene_types),
        alpha_x=np.zeros(g),
        gamma_x=np.zeros(g),
        beta_m=np.zeros(g),
        beta_f=np.zeros(g),
        dispersion=np.ones(g),
    )


def fake_report(m_sig, f_sig, seconds=0.5):
    def entry(gene, pathway, significant):
        return GeneMediationResult(
            gene=gene,
            pathway=pathway,
            path_coef=1.0,
            path_se=0.5,
            exposure_coef=1.0,
            exposure_se=0.5,
            iie=1.0,
            iie_subject_avg=1.0,
            p_path=0.01,
            p_exposure=0.01,
            p_max=0.01,
            p_adjusted=0.01 if significant else 0.9,
            significant=significant,
        )

    fit = RegressionFit(
        names=("X",),
        coefficients=np.array([1.0]),
        standard_errors=np.array([0.1]),
        p_values=np.array([0.0]),
        aux={"residual_var": 1.0},
        converged=True,
        iterations=1,
        log_likelihood=0.0,
    )
    return MediationReport(
        method="medzisc",
        outcome_fit=fit,
        m_results=tuple(entry(g, "M", True) for g in m_sig),
        f_results=tuple(entry(g, "F", True) for g in f_sig),
        screening=None,
        significance_level=0.05,
        contrast=(0.0, 1.0),
        covariate_profile=(0.0,),
        elapsed_seconds=seconds,
    )


class TestScoreReplicate:
    def test_partial_recovery(self):
        # 8 true M mediators, 6 found, none false.
        truth = make_truth(["both"] * 4 + ["m_only"] * 4 + ["none"] * 4)
        report = fake_report([f"g{i}" for i in range(6)], [])
        score = score_replicate(report, truth)
        assert score.power_m == pytest.approx(6 / 8)
        assert score.fdr_m == 0.0

    def test_no_discoveries_has_zero_fdr(self):
        truth = make_truth(["both", "none"])
        score = score_replicate(fake_report([], []), truth)
        assert score.fdr_m == 0.0
        assert score.discoveries_m == 0

    def test_all_false_discoveries(self):
        truth = make_truth(["none", "none", "both"])
        score = score_replicate(fake_report(["g0", "g1"], []), truth)
        assert score.fdr_m == 1.0

    def test_power_missing_without_true_mediators(self):
        truth = make_truth(["none", "none"])
        score = score_replicate(fake_report(["g0"], []), truth)
        assert np.isnan(score.power_m)
        assert score.fdr_m == 1.0

    def test_matches_confusion_matrix_oracle(self):
        rng = np.random.default_rng(0)
        types = np.array(["none", "both", "m_only", "f_only"])
        for _ in range(100):
            g = int(rng.integers(2, 12))
            truth = make_truth(list(rng.choice(types, g)))
            genes = list(truth.gene_names)
            m_sig = [gn for gn in genes if rng.random() < 0.4]
            f_sig = [gn for gn in genes if rng.random() < 0.4]
            score = score_replicate(fake_report(m_sig, f_sig), truth)
            for declared, family, power, fdr in (
                (m_sig, set(truth.m_family), score.power_m, score.fdr_m),
                (f_sig, set(truth.f_family), score.power_f, score.fdr_f),
            ):
                tp = sum(1 for gn in declared if gn in family)
                fp = sum(1 for gn in declared if gn not in family)
                if family:
                    assert power == pytest.approx(tp / len(family))
                else:
                    assert np.isnan(power)
                expected_fdr = fp / len(declared) if declared else 0.0
                assert fdr == pytest.approx(expected_fdr)


def tiny_config(**overrides):
    base = dict(
        n_subjects=24,
        cells_per_subject=15,
        n_genes=10,
        n_true_mediators=2,
        split=(1.0, 0.0, 0.0),
        noise_sd=0.5,
        seed=42,
        replicate_count=2,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


class TestRunBenchmark:
    def test_single_replicate_table_equals_scores(self):
        cfg = tiny_config(replicate_count=1)
        scores, errors = run_cell_replicate(cfg, 0, methods=("medzisc",))
        assert not errors
        table = run_benchmark([cfg], methods=("medzisc",))
        row = table.rows[0]
        assert row.power_m == pytest.approx(scores[0].power_m, nan_ok=True)
        assert row.fdr_m == pytest.approx(scores[0].fdr_m)
        assert row.n_replicates == 1

    def test_averages_order_invariant_and_parallel_identical(self):
        cfg = tiny_config(replicate_count=3)
        serial = run_benchmark([cfg], methods=("medzisc",), threads=1)
        parallel = run_benchmark([cfg], methods=("medzisc",), threads=2)
        for a, b in zip(serial.rows, parallel.rows):
            assert a.power_m == b.power_m or (np.isnan(a.power_m) and np.isnan(b.power_m))
            assert a.fdr_m == b.fdr_m
            assert a.power_f == b.power_f or (np.isnan(a.power_f) and np.isnan(b.power_f))
            assert a.fdr_f == b.fdr_f

    def test_both_methods_present(self):
        cfg = tiny_config(replicate_count=1)
        table = run_benchmark([cfg])
        assert [r.method for r in table.rows] == ["medzisc", "naive"]

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            run_cell_replicate(tiny_config(), 0, methods=("oracle",))


class TestGrid:
    def test_expand_grid_product(self):
        configs, methods, analysis, thresholds = expand_grid(
            {
                "n_subjects": [10, 20],
                "cells_per_subject": 5,
                "n_genes": [4, 6],
                "n_true_mediators": 1,
                "split": [1.0, 0.0, 0.0],
                "seed": 1,
            }
        )
        shapes = {(c.n_subjects, c.cells_per_subject, c.n_genes) for c in configs}
        assert shapes == {(10, 5, 4), (10, 5, 6), (20, 5, 4), (20, 5, 6)}
        assert methods == ("medzisc", "naive")

    def test_grid_requires_axes(self):
        with pytest.raises(ConfigError, match="n_genes"):
            expand_grid({"n_subjects": 10, "cells_per_subject": 5})

    def test_threshold_validation(self):
        with pytest.raises(ConfigError):
            expand_grid(
                {
                    "n_subjects": 4,
                    "cells_per_subject": 4,
                    "n_genes": 4,
                    "thresholds": [{"metric": "accuracy", "min": 0.5}],
                }
            )

    def test_threshold_evaluation(self):
        from medzisc.benchmark import BenchmarkRow

        rows = (
            BenchmarkRow(100, 100, 100, "medzisc", 0.95, 0.8, 0.02, 0.03, 1.0, 50, 0),
            BenchmarkRow(100, 100, 100, "naive", 0.6, 0.4, 0.45, 0.05, 1.3, 50, 0),
        )
        table = BenchmarkTable(rows=rows, raw_scores=(), failures=())
        violations = evaluate_thresholds(
            table,
            [
                {"method": "medzisc", "metric": "power_m", "min": 0.9},
                {"method": "medzisc", "metric": "fdr_m", "max": 0.08},
                {"method": "naive", "metric": "fdr_m", "min": 0.25},
            ],
        )
        assert violations == []
        violations = evaluate_thresholds(
            table, [{"method": "naive", "metric": "power_m", "min": 0.99}]
        )
        assert len(violations) == 1
        assert "power_m" in violations[0]
