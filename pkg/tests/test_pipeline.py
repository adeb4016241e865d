"""Pipeline behavior: closed-form effects, testing machinery, screening, end-to-end runs."""

import numpy as np
import pytest
from scipy.special import expit, logit

from medzisc.data import PseudobulkDataset, SubjectTable
from medzisc.exceptions import ConfigError, DomainError
from medzisc.pipeline import (
    AnalysisConfig,
    bh_adjust,
    estimate_iie_f,
    estimate_iie_m,
    fit_final_models,
    js_test,
    run_medzisc,
    run_naive,
    screen_mediators,
)


def brute_force_bh(p):
    """Literal step-up definition: adjusted_(i) = min_{j>=i} (m/j) p_(j), capped at 1."""
    p = np.asarray(p, float)
    m = p.size
    order = np.argsort(p, kind="stable")
    adjusted_sorted = np.empty(m)
    for i in range(m):
        adjusted_sorted[i] = min(
            min((m / (j + 1)) * p[order[j]] for j in range(i, m)), 1.0
        )
    out = np.empty(m)
    out[order] = adjusted_sorted
    return out


def synthetic_dataset(
    n=150,
    n_genes=8,
    signal_gene=0,
    gamma_x=1.0,
    alpha_x=0.0,
    beta_m=2.0,
    beta_f=0.0,
    noise_sd=0.5,
    seed=0,
):
    """Pseudobulk data built directly (no cell sampling) with one planted gene.

    Mean expression follows a lognormal around exp(gamma_x X + 0.3 sum(Z)),
    the zero proportion an expit-normal around alpha_x X + 0.1 sum(Z); all
    other genes carry no exposure effect and no outcome effect.
    """
    rng = np.random.default_rng(seed)
    x = (rng.random(n) < 0.5).astype(float)
    z = rng.standard_normal((n, 3))
    zsum = z.sum(axis=1)
    mean_expr = np.empty((n, n_genes))
    zero_prop = np.empty((n, n_genes))
    for g in range(n_genes):
        gx = gamma_x if g == signal_gene else 0.0
        ax = alpha_x if g == signal_gene else 0.0
        mean_expr[:, g] = np.exp(gx * x + 0.3 * zsum + 0.25 * rng.standard_normal(n))
        zero_prop[:, g] = expit(ax * x + 0.1 * zsum + 0.3 * rng.standard_normal(n))
    zero_prop = np.clip(zero_prop, 0.001, 0.999)
    y = (
        3.0 * x
        + z @ np.array([0.5, -0.3, 0.2])
        + beta_m * mean_expr[:, signal_gene]
        + beta_f * zero_prop[:, signal_gene]
        + noise_sd * rng.standard_normal(n)
    )
    subjects = SubjectTable(
        [f"s{i}" for i in range(n)], exposure=x, covariates=z, outcome=y
    )
    return PseudobulkDataset(
        subjects=subjects,
        mean_expr=mean_expr,
        zero_prop=zero_prop,
        gene_names=tuple(f"g{j}" for j in range(n_genes)),
        f_modeled=np.ones(n_genes, dtype=bool),
    )


class TestIieM:
    def test_zero_contrast_is_exactly_zero(self):
        assert estimate_iie_m(5.0, 2.0, [0.3], [1.2], 0.7, 0.7) == 0.0

    def test_hand_substituted_value(self):
        # beta_m = 2, gamma_x = ln 2, covariate term 0: 2 * (2 - 1) = 2.
        val = estimate_iie_m(2.0, np.log(2.0), [0.0], [1.0], 0.0, 1.0)
        assert val == pytest.approx(2.0, abs=1e-10)

    def test_linear_in_path_coefficient(self):
        base = estimate_iie_m(1.5, 0.4, [0.2, -0.1], [1.0, 2.0], 0.0, 1.0)
        neg = estimate_iie_m(-1.5, 0.4, [0.2, -0.1], [1.0, 2.0], 0.0, 1.0)
        assert neg == pytest.approx(-base)

    def test_zero_path_coefficient_exact_even_under_overflow(self):
        assert estimate_iie_m(0.0, 800.0, [0.0], [1.0], 0.0, 1.0) == 0.0
        assert estimate_iie_f(0.0, 800.0, [0.0], [1.0], 0.0, 1.0) == 0.0

    def test_sign_structure(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            bm = rng.normal()
            gx = rng.normal()
            x1, x2 = sorted(rng.normal(size=2))
            if x1 == x2:
                continue
            val = estimate_iie_m(bm, gx, [0.1], [rng.normal()], x1, x2)
            expected_sign = np.sign(bm) * np.sign(np.exp(gx * x2) - np.exp(gx * x1))
            assert np.sign(val) == expected_sign or val == 0.0


class TestIieF:
    def test_zero_contrast(self):
        assert estimate_iie_f(3.0, 1.0, [0.5], [0.2], 1.3, 1.3) == 0.0

    def test_hand_substituted_value(self):
        # expit(logit(0.7)) - expit(0) = 0.2, so 10 * 0.2 = 2.
        val = estimate_iie_f(10.0, float(logit(0.7)), [0.0], [1.0], 0.0, 1.0)
        assert val == pytest.approx(2.0, abs=1e-10)

    def test_bounded_by_path_coefficient(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            bf = rng.normal(scale=5)
            val = estimate_iie_f(
                bf, rng.normal(scale=3), rng.normal(size=2), rng.normal(size=2),
                rng.normal(), rng.normal(),
            )
            assert abs(val) <= abs(bf) + 1e-12


class TestJsTest:
    def test_max(self):
        assert js_test(0.01, 0.04) == 0.04
        assert js_test(1.0, 0.0) == 1.0
        assert js_test(0.3, 0.3) == 0.3

    def test_domain(self):
        with pytest.raises(DomainError):
            js_test(-0.1, 0.5)


class TestBhAdjust:
    def test_single_p_unchanged(self):
        np.testing.assert_array_equal(bh_adjust([0.37]), [0.37])

    def test_textbook_example(self):
        np.testing.assert_allclose(
            bh_adjust([0.01, 0.02, 0.03, 0.04]), [0.04, 0.04, 0.04, 0.04]
        )

    def test_adjusted_at_least_raw(self):
        rng = np.random.default_rng(5)
        p = rng.random(40)
        adj = bh_adjust(p)
        assert np.all(adj >= p - 1e-15)
        assert np.all(adj <= 1.0)

    def test_matches_brute_force_on_random_vectors(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            m = int(rng.integers(1, 25))
            p = rng.random(m)
            np.testing.assert_array_equal(bh_adjust(p), brute_force_bh(p))

    def test_empty_vector(self):
        assert bh_adjust([]).size == 0


class TestScreening:
    def test_planted_m_signal_selected_with_flag(self):
        ds = synthetic_dataset(gamma_x=1.2, beta_m=3.0, seed=3)
        cfg = AnalysisConfig(seed=1)
        result = screen_mediators(ds, cfg)
        assert "g0" in result.candidates
        assert result.m_term["g0"]

    def test_empty_screen_is_valid(self):
        ds = synthetic_dataset(gamma_x=0.0, beta_m=0.0, noise_sd=1.0, seed=4)
        cfg = AnalysisConfig(seed=2)
        result = screen_mediators(ds, cfg)
        # No planted signal: the candidate set may be empty and that is fine.
        assert isinstance(result.candidates, tuple)

    def test_conjunction_excludes_outcome_only_genes(self):
        # Gene influences the outcome directly (selected by the lasso) but has
        # no exposure association, so the conjunction rule must exclude it.
        ds = synthetic_dataset(gamma_x=0.0, alpha_x=0.0, beta_m=3.0, seed=5)
        cfg = AnalysisConfig(seed=3)
        res = screen_mediators(ds, cfg)
        if "g0" in res.outcome_selected:
            assert "g0" not in res.candidates
        union = screen_mediators(ds, AnalysisConfig(seed=3, screening_rule="union"))
        assert "g0" in union.candidates or "g0" not in union.outcome_selected

    def test_monotone_in_marginal_alpha(self):
        ds = synthetic_dataset(gamma_x=0.6, beta_m=1.0, seed=6)
        sizes = []
        for alpha in (0.01, 0.05, 0.2):
            res = screen_mediators(ds, AnalysisConfig(seed=4, marginal_alpha=alpha))
            sizes.append(
                (len(res.m_exposure_significant), len(res.f_exposure_significant))
            )
        assert sizes[0][0] <= sizes[1][0] <= sizes[2][0]
        assert sizes[0][1] <= sizes[1][1] <= sizes[2][1]


class TestFinalModels:
    def test_empty_candidates_reduce_to_base_model(self):
        ds = synthetic_dataset(seed=7)
        cfg = AnalysisConfig(seed=5)
        screening = screen_mediators(
            ds, AnalysisConfig(seed=5, lasso_lambda=1e9)
        )
        assert screening.candidates == ()
        fit, _ = fit_final_models(ds, screening, cfg)
        assert set(fit.names) == {"intercept", "X", "Z1", "Z2", "Z3"}
        assert np.isfinite(fit.coefficient("X"))

    def test_noise_free_recovery(self):
        ds = synthetic_dataset(gamma_x=1.2, beta_m=2.5, noise_sd=0.0, seed=8)
        cfg = AnalysisConfig(seed=6)
        report = run_medzisc(ds, cfg)
        assert "M:g0" in report.outcome_fit.names
        assert report.outcome_fit.coefficient("M:g0") == pytest.approx(2.5, abs=1e-6)
        assert report.direct_effect == pytest.approx(3.0, abs=1e-6)


class TestRunMedzisc:
    def test_deterministic(self):
        ds = synthetic_dataset(seed=9)
        cfg = AnalysisConfig(seed=7)
        r1 = run_medzisc(ds, cfg)
        r2 = run_medzisc(ds, cfg)
        assert [e.to_dict() for e in r1.m_results] == [e.to_dict() for e in r2.m_results]
        np.testing.assert_array_equal(
            r1.outcome_fit.coefficients, r2.outcome_fit.coefficients
        )

    def test_pvalue_ordering_invariants(self):
        ds = synthetic_dataset(gamma_x=1.0, beta_m=2.0, alpha_x=1.0, beta_f=5.0, seed=10)
        report = run_medzisc(ds, AnalysisConfig(seed=8))
        for entry in report.m_results + report.f_results:
            assert entry.p_max == max(entry.p_path, entry.p_exposure)
            assert entry.p_adjusted >= entry.p_max - 1e-15
            assert 0.0 <= entry.p_adjusted <= 1.0

    def test_planted_gene_discovered(self):
        ds = synthetic_dataset(gamma_x=1.2, beta_m=3.0, seed=11)
        report = run_medzisc(ds, AnalysisConfig(seed=9))
        assert "g0" in report.significant_genes("M")


class TestRunNaive:
    def test_deterministic(self):
        ds = synthetic_dataset(seed=12)
        cfg = AnalysisConfig(seed=10)
        r1 = run_naive(ds, cfg)
        r2 = run_naive(ds, cfg)
        assert [e.to_dict() for e in r1.m_results] == [e.to_dict() for e in r2.m_results]

    def test_single_gene_bh_identity(self):
        ds = synthetic_dataset(n_genes=1, gamma_x=1.0, beta_m=2.0, seed=13)
        report = run_naive(ds, AnalysisConfig(seed=11))
        assert len(report.m_results) == 1
        entry = report.m_results[0]
        assert entry.p_adjusted == pytest.approx(entry.p_max)
        assert entry.significant == (entry.p_max <= 0.05)

    def test_every_gene_analyzed(self):
        ds = synthetic_dataset(n_genes=6, seed=14)
        report = run_naive(ds, AnalysisConfig(seed=12))
        assert len(report.m_results) == 6
        assert len(report.f_results) == 6

    def test_joint_and_separate_modes_differ_only_in_outcome_model(self):
        ds = synthetic_dataset(gamma_x=1.0, beta_m=2.0, seed=15)
        sep = run_naive(ds, AnalysisConfig(seed=13, naive_terms="separate"))
        joint = run_naive(ds, AnalysisConfig(seed=13, naive_terms="joint"))
        sep_m = {e.gene: e.p_exposure for e in sep.m_results}
        joint_m = {e.gene: e.p_exposure for e in joint.m_results}
        # Marginal mediator models are shared between modes.
        assert sep_m == joint_m


class TestJsConservativeness:
    def test_zero_leg_pathway_rarely_declared(self):
        # A gene with a real outcome path but no exposure path must not be
        # declared a mediator: the exposure-side p-value is uniform under the
        # null, so the max-p rule keeps the JS test at or below level.
        hits = 0
        n_reps = 40
        for rep in range(n_reps):
            ds = synthetic_dataset(
                n=60, n_genes=5, gamma_x=0.0, beta_m=2.5, noise_sd=0.5, seed=100 + rep
            )
            report = run_naive(ds, AnalysisConfig(seed=rep))
            entry = next((e for e in report.m_results if e.gene == "g0"), None)
            if entry is not None and entry.p_max <= 0.05:
                hits += 1
        # Binomial(40, 0.05) stays below 8 with overwhelming probability.
        assert hits <= 7


class TestAnalysisConfig:
    def test_bad_rule_rejected(self):
        with pytest.raises(ConfigError):
            AnalysisConfig(screening_rule="sometimes")

    def test_bad_profile_length(self):
        ds = synthetic_dataset(seed=16)
        with pytest.raises(ConfigError):
            run_medzisc(ds, AnalysisConfig(covariate_profile=(0.0,)))

    def test_roundtrip(self):
        cfg = AnalysisConfig(contrast=(0.0, 2.0), covariate_profile=(0.1, 0.2, 0.3))
        assert AnalysisConfig.from_dict(cfg.to_dict()) == cfg
