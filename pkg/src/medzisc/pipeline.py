"""The mediation procedure end to end, plus the no-screening baseline.

The main path screens candidate genes (L1-penalized outcome model combined
with marginal exposure tests), fits the joint outcome model over the
selected co-mediator terms, computes closed-form interventional indirect
effects at a covariate profile, and tests each pathway with the
joint-significance rule (max of the two component p-values) under BH
correction within each mediator family.

The baseline fits per-gene outcome models for every gene with no screening
and applies the same testing machinery; it exists to quantify the false
discovery cost of skipping the screening and joint-model stages.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import PseudobulkDataset, filter_degenerate_genes
from .exceptions import ConfigError, DomainError, PipelineError, SingularDesignError
from .glm import (
    DesignMatrix,
    LassoFit,
    RegressionFit,
    build_design,
    fit_beta_regression,
    fit_lasso,
    fit_nb_regression,
    fit_ols,
)

logger = logging.getLogger(__name__)

SCREENING_RULES = ("conjunction", "union")
NAIVE_TERM_MODES = ("separate", "joint")


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of the analysis pipeline; defaults reproduce the benchmarks.

    ``screening_rule`` controls how the penalized outcome selection combines
    with the marginal exposure tests: "conjunction" keeps genes that pass
    both, "union" keeps genes that pass either. ``naive_terms`` chooses
    whether the baseline's per-gene outcome model carries the gene's mean
    and zero-proportion terms in separate models or jointly in one.
    """

    screening_rule: str = "conjunction"
    marginal_alpha: float = 0.05
    significance_level: float = 0.05
    contrast: tuple = (0.0, 1.0)
    covariate_profile: tuple | None = None
    lasso_lambda: float | None = None
    cv_folds: int = 10
    n_lambdas: int = 100
    cv_rule: str = "1se"
    seed: int = 0
    include_intercept: bool = True
    naive_terms: str = "separate"

    def __post_init__(self):
        if self.screening_rule not in SCREENING_RULES:
            raise ConfigError(f"screening_rule must be one of {SCREENING_RULES}")
        if self.naive_terms not in NAIVE_TERM_MODES:
            raise ConfigError(f"naive_terms must be one of {NAIVE_TERM_MODES}")
        for name in ("marginal_alpha", "significance_level"):
            v = getattr(self, name)
            if not (0 < v < 1):
                raise ConfigError(f"{name} must lie strictly inside (0, 1)")
        contrast = tuple(float(v) for v in self.contrast)
        if len(contrast) != 2 or not all(np.isfinite(contrast)):
            raise ConfigError("contrast must be two finite exposure values")
        object.__setattr__(self, "contrast", contrast)
        if self.covariate_profile is not None:
            profile = tuple(float(v) for v in self.covariate_profile)
            object.__setattr__(self, "covariate_profile", profile)
        if self.lasso_lambda is not None and self.lasso_lambda < 0:
            raise ConfigError("lasso_lambda must be nonnegative")
        if self.cv_rule not in ("min", "1se"):
            raise ConfigError("cv_rule must be 'min' or '1se'")

    def to_dict(self) -> dict:
        return {
            "screening_rule": self.screening_rule,
            "marginal_alpha": self.marginal_alpha,
            "significance_level": self.significance_level,
            "contrast": list(self.contrast),
            "covariate_profile": (
                None if self.covariate_profile is None else list(self.covariate_profile)
            ),
            "lasso_lambda": self.lasso_lambda,
            "cv_folds": self.cv_folds,
            "n_lambdas": self.n_lambdas,
            "cv_rule": self.cv_rule,
            "seed": self.seed,
            "include_intercept": self.include_intercept,
            "naive_terms": self.naive_terms,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "AnalysisConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError("unknown analysis config keys: " + ", ".join(sorted(unknown)))
        raw = dict(raw)
        for key in ("contrast", "covariate_profile"):
            if raw.get(key) is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass(frozen=True)
class ScreeningResult:
    """Outcome-selected, exposure-significant and final candidate gene sets."""

    outcome_selected: tuple
    m_exposure_significant: tuple
    f_exposure_significant: tuple
    candidates: tuple
    m_term: dict
    f_term: dict
    lasso: LassoFit
    nb_fits: dict
    beta_fits: dict
    skipped: tuple = ()

    def to_dict(self) -> dict:
        return {
            "outcome_selected": list(self.outcome_selected),
            "m_exposure_significant": list(self.m_exposure_significant),
            "f_exposure_significant": list(self.f_exposure_significant),
            "candidates": list(self.candidates),
            "m_term": {g: bool(v) for g, v in self.m_term.items()},
            "f_term": {g: bool(v) for g, v in self.f_term.items()},
            "lasso_lambda": self.lasso.lam,
            "skipped": list(self.skipped),
        }


@dataclass(frozen=True)
class GeneMediationResult:
    """Indirect-effect estimate and joint-significance test for one gene pathway."""

    gene: str
    pathway: str  # "M" or "F"
    path_coef: float
    path_se: float
    exposure_coef: float
    exposure_se: float
    iie: float
    iie_subject_avg: float
    p_path: float
    p_exposure: float
    p_max: float
    p_adjusted: float = np.nan
    significant: bool = False

    def to_dict(self) -> dict:
        return {
            "gene": self.gene,
            "pathway": self.pathway,
            "path_coef": self.path_coef,
            "path_se": self.path_se,
            "exposure_coef": self.exposure_coef,
            "exposure_se": self.exposure_se,
            "iie": self.iie,
            "iie_subject_avg": self.iie_subject_avg,
            "p_path": self.p_path,
            "p_exposure": self.p_exposure,
            "p_max": self.p_max,
            "p_adjusted": self.p_adjusted,
            "significant": bool(self.significant),
        }


@dataclass(frozen=True)
class MediationReport:
    """Full analysis result for one method run."""

    method: str
    outcome_fit: RegressionFit
    m_results: tuple
    f_results: tuple
    screening: ScreeningResult | None
    significance_level: float
    contrast: tuple
    covariate_profile: tuple
    elapsed_seconds: float
    removed_genes: tuple = ()
    warnings: tuple = ()

    @property
    def direct_effect(self) -> float:
        return self.outcome_fit.coefficient("X")

    @property
    def direct_effect_se(self) -> float:
        return self.outcome_fit.stderr("X")

    @property
    def direct_effect_p(self) -> float:
        return self.outcome_fit.p_value("X")

    def significant_genes(self, pathway: str) -> tuple:
        results = self.m_results if pathway == "M" else self.f_results
        return tuple(r.gene for r in results if r.significant)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "direct_effect": {
                "estimate": self.direct_effect,
                "se": self.direct_effect_se,
                "p_value": self.direct_effect_p,
            },
            "outcome_fit": self.outcome_fit.to_dict(),
            "m_results": [r.to_dict() for r in self.m_results],
            "f_results": [r.to_dict() for r in self.f_results],
            "screening": None if self.screening is None else self.screening.to_dict(),
            "significance_level": self.significance_level,
            "contrast": list(self.contrast),
            "covariate_profile": list(self.covariate_profile),
            "elapsed_seconds": self.elapsed_seconds,
            "removed_genes": list(self.removed_genes),
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------

def js_test(p_a: float, p_b: float) -> float:
    """Joint-significance p-value: the larger of the two component p-values."""
    for p in (p_a, p_b):
        if not (0.0 <= p <= 1.0):
            raise DomainError("p-values must lie in [0, 1]")
    return max(p_a, p_b)


def bh_adjust(p) -> np.ndarray:
    """Step-up adjusted p-values, returned in the input order.

    adjusted_(i) = min_{j >= i} (m / j) p_(j) over the ascending order
    statistics, capped at 1.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise DomainError("expected a 1-d vector of p-values")
    if p.size == 0:
        return p.copy()
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise DomainError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = p[order] * (m / np.arange(1, m + 1))
    adjusted = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(adjusted, 1.0)
    return out


def estimate_iie_m(beta_m, gamma_x, gamma_z, z, x1, x2) -> float:
    """Indirect effect through mean expression for an exposure move x1 -> x2.

    beta_m * exp(gamma_z . z) * (exp(gamma_x x2) - exp(gamma_x x1)); the
    covariate term can fold in an intercept by pairing it with a constant 1
    entry in z.
    """
    if x1 == x2 or beta_m == 0.0:
        return 0.0
    gz = float(np.dot(np.asarray(gamma_z, float), np.asarray(z, float)))
    with np.errstate(over="ignore"):
        return float(beta_m * np.exp(gz) * (np.exp(gamma_x * x2) - np.exp(gamma_x * x1)))


def estimate_iie_f(beta_f, alpha_x, alpha_z, z, x1, x2) -> float:
    """Indirect effect through the zero proportion for an exposure move x1 -> x2.

    beta_f * (expit(alpha_x x2 + alpha_z . z) - expit(alpha_x x1 + alpha_z . z)).
    """
    if x1 == x2 or beta_f == 0.0:
        return 0.0
    az = float(np.dot(np.asarray(alpha_z, float), np.asarray(z, float)))
    return float(beta_f * (expit(alpha_x * x2 + az) - expit(alpha_x * x1 + az)))


# ---------------------------------------------------------------------------
# Marginal mediator models
# ---------------------------------------------------------------------------

def _mediator_design(dataset: PseudobulkDataset, config: AnalysisConfig) -> DesignMatrix:
    subjects = dataset.subjects
    cols = [("X", subjects.exposure)]
    cols.extend(
        (name, subjects.covariates[:, j])
        for j, name in enumerate(subjects.covariate_names)
    )
    return build_design(cols, intercept=config.include_intercept)


def fit_marginal_models(dataset: PseudobulkDataset, config: AnalysisConfig):
    """Per-gene exposure models: NB for mean expression, beta for zero proportion.

    Returns (nb_fits, beta_fits, skipped) keyed by gene name; genes whose
    fit fails or does not converge are left out of the corresponding map and
    listed in ``skipped`` with a reason.
    """
    design = _mediator_design(dataset, config)
    nb_fits: dict = {}
    beta_fits: dict = {}
    skipped = []
    for j, gene in enumerate(dataset.gene_names):
        try:
            fit = fit_nb_regression(dataset.mean_expr[:, j], design)
            if fit.converged:
                nb_fits[gene] = fit
            else:
                skipped.append((gene, "M", "marginal NB fit did not converge"))
        except Exception as exc:  # per-gene resilience: log and move on
            skipped.append((gene, "M", f"marginal NB fit failed: {exc}"))
        if dataset.f_modeled[j]:
            try:
                fit = fit_beta_regression(dataset.zero_prop[:, j], design)
                if fit.converged:
                    beta_fits[gene] = fit
                else:
                    skipped.append((gene, "F", "marginal beta fit did not converge"))
            except Exception as exc:  # per-gene resilience: log and move on
                skipped.append((gene, "F", f"marginal beta fit failed: {exc}"))
    for gene, family, reason in skipped:
        logger.warning("gene %s (%s family): %s", gene, family, reason)
    return nb_fits, beta_fits, tuple(skipped)


# ---------------------------------------------------------------------------
# Screening and final models
# ---------------------------------------------------------------------------

def _mediator_columns(dataset: PseudobulkDataset):
    """(name, column) pairs for every mediator term, zero-proportion terms
    only where the pathway is modeled."""
    cols = []
    for j, gene in enumerate(dataset.gene_names):
        cols.append((f"M:{gene}", dataset.mean_expr[:, j]))
    for j, gene in enumerate(dataset.gene_names):
        if dataset.f_modeled[j]:
            cols.append((f"F:{gene}", dataset.zero_prop[:, j]))
    return cols


def screen_mediators(
    dataset: PseudobulkDataset,
    config: AnalysisConfig,
    marginals=None,
) -> ScreeningResult:
    """Select candidate mediator genes.

    The outcome is lasso-regressed on exposure and covariates (unpenalized)
    plus every mediator column (penalized); separately, each gene's marginal
    exposure coefficient is tested at ``marginal_alpha``. Under the default
    conjunction rule a candidate must be selected by the lasso and show a
    significant exposure association on at least one pathway; the union rule
    keeps any gene passing either screen.
    """
    y = dataset.subjects.require_outcome()
    if marginals is None:
        marginals = fit_marginal_models(dataset, config)
    nb_fits, beta_fits, skipped = marginals

    g_m = tuple(
        gene
        for gene in dataset.gene_names
        if gene in nb_fits and nb_fits[gene].p_value("X") <= config.marginal_alpha
    )
    g_f = tuple(
        gene
        for gene in dataset.gene_names
        if gene in beta_fits and beta_fits[gene].p_value("X") <= config.marginal_alpha
    )

    subjects = dataset.subjects
    cols = [("X", subjects.exposure)]
    cols.extend(
        (name, subjects.covariates[:, j])
        for j, name in enumerate(subjects.covariate_names)
    )
    unpenalized = tuple(name for name, _ in cols)
    cols.extend(_mediator_columns(dataset))
    design = build_design(cols, intercept=False)
    try:
        lasso = fit_lasso(
            y,
            design,
            unpenalized=unpenalized,
            lam=config.lasso_lambda,
            cv_folds=config.cv_folds,
            n_lambdas=config.n_lambdas,
            cv_rule=config.cv_rule,
            seed=config.seed,
        )
    except Exception as exc:
        raise PipelineError(f"outcome screening lasso failed: {exc}") from exc

    g_y = tuple(
        gene
        for gene in dataset.gene_names
        if f"M:{gene}" in lasso.selected or f"F:{gene}" in lasso.selected
    )

    set_y, set_m, set_f = set(g_y), set(g_m), set(g_f)
    if config.screening_rule == "conjunction":
        chosen = set_y & (set_m | set_f)
    else:
        chosen = set_y | set_m | set_f
    candidates = tuple(g for g in dataset.gene_names if g in chosen)
    m_term = {g: g in set_m for g in candidates}
    f_term = {g: g in set_f for g in candidates}
    return ScreeningResult(
        outcome_selected=g_y,
        m_exposure_significant=g_m,
        f_exposure_significant=g_f,
        candidates=candidates,
        m_term=m_term,
        f_term=f_term,
        lasso=lasso,
        nb_fits=nb_fits,
        beta_fits=beta_fits,
        skipped=skipped,
    )


def _independent_columns(pairs, warnings_out):
    """Drop later-indexed columns that are collinear with earlier ones."""
    kept = []
    matrix = None
    for name, col in pairs:
        candidate = col[:, None] if matrix is None else np.column_stack([matrix, col])
        if np.linalg.matrix_rank(candidate) == candidate.shape[1]:
            matrix = candidate
            kept.append((name, col))
        else:
            warnings_out.append(f"dropped collinear outcome term {name}")
            logger.warning("dropped collinear outcome term %s", name)
    return kept


def fit_final_models(
    dataset: PseudobulkDataset,
    screening: ScreeningResult,
    config: AnalysisConfig,
):
    """Joint outcome model over the selected terms; marginal fits are reused.

    Returns (outcome_fit, warnings). An empty candidate set degrades to the
    exposure-plus-covariates outcome model.
    """
    subjects = dataset.subjects
    y = subjects.require_outcome()
    warnings_out: list = []
    base = [("X", subjects.exposure)]
    base.extend(
        (name, subjects.covariates[:, j])
        for j, name in enumerate(subjects.covariate_names)
    )
    terms = []
    for gene in screening.candidates:
        j = dataset.gene_index(gene)
        if screening.m_term.get(gene):
            terms.append((f"M:{gene}", dataset.mean_expr[:, j]))
        if screening.f_term.get(gene):
            terms.append((f"F:{gene}", dataset.zero_prop[:, j]))

    if config.include_intercept:
        base = [("intercept", np.ones(subjects.n_subjects))] + base
    kept = _independent_columns(base + terms, warnings_out)
    design = DesignMatrix(
        np.column_stack([c for _, c in kept]), tuple(n for n, _ in kept)
    )
    outcome_fit = fit_ols(y, design)
    return outcome_fit, tuple(warnings_out)


# ---------------------------------------------------------------------------
# Assembling per-gene results
# ---------------------------------------------------------------------------

def _covariate_profile(dataset: PseudobulkDataset, config: AnalysisConfig) -> np.ndarray:
    if config.covariate_profile is not None:
        profile = np.asarray(config.covariate_profile, dtype=float)
        if profile.shape != (dataset.subjects.n_covariates,):
            raise ConfigError(
                f"covariate profile needs {dataset.subjects.n_covariates} values"
            )
        return profile
    return dataset.subjects.covariates.mean(axis=0)


def _non_exposure_terms(fit: RegressionFit, profile: np.ndarray, covariate_names):
    """Coefficient vector and matching profile values for everything but X."""
    names = [n for n in fit.names if n != "X"]
    coefs = np.array([fit.coefficient(n) for n in names])
    lookup = dict(zip(covariate_names, profile))
    values = np.array([1.0 if n == "intercept" else lookup[n] for n in names])
    return coefs, values, names


def _subject_profiles(subjects, names):
    cols = []
    for n in names:
        if n == "intercept":
            cols.append(np.ones(subjects.n_subjects))
        else:
            cols.append(subjects.covariates[:, list(subjects.covariate_names).index(n)])
    return np.column_stack(cols) if cols else np.zeros((subjects.n_subjects, 0))


def _gene_entry(
    pathway: str,
    gene: str,
    path_fit: RegressionFit,
    marginal_fit: RegressionFit,
    dataset: PseudobulkDataset,
    config: AnalysisConfig,
    profile: np.ndarray,
    warnings_out: list,
) -> GeneMediationResult:
    term = f"{pathway}:{gene}"
    path_coef = path_fit.coefficient(term)
    path_se = path_fit.stderr(term)
    p_path = path_fit.p_value(term)
    exp_coef = marginal_fit.coefficient("X")
    exp_se = marginal_fit.stderr("X")
    p_exp = marginal_fit.p_value("X")
    x1, x2 = config.contrast

    coefs, values, names = _non_exposure_terms(
        marginal_fit, profile, dataset.subjects.covariate_names
    )
    estimator = estimate_iie_m if pathway == "M" else estimate_iie_f
    iie = estimator(path_coef, exp_coef, coefs, values, x1, x2)
    z_matrix = _subject_profiles(dataset.subjects, names)
    per_subject = np.array(
        [estimator(path_coef, exp_coef, coefs, z_matrix[i], x1, x2) for i in range(z_matrix.shape[0])]
    )
    iie_avg = float(np.mean(per_subject)) if per_subject.size else 0.0
    if not np.isfinite(iie):
        warnings_out.append(
            f"non-finite indirect effect for {gene} ({pathway} pathway); exp overflow"
        )
        logger.warning("non-finite indirect effect for %s (%s pathway)", gene, pathway)
    return GeneMediationResult(
        gene=gene,
        pathway=pathway,
        path_coef=path_coef,
        path_se=path_se,
        exposure_coef=exp_coef,
        exposure_se=exp_se,
        iie=iie,
        iie_subject_avg=iie_avg,
        p_path=p_path,
        p_exposure=p_exp,
        p_max=js_test(p_path, p_exp),
    )


def _apply_bh(entries, level) -> tuple:
    if not entries:
        return ()
    adjusted = bh_adjust([e.p_max for e in entries])
    out = []
    for e, q in zip(entries, adjusted):
        out.append(
            GeneMediationResult(
                gene=e.gene,
                pathway=e.pathway,
                path_coef=e.path_coef,
                path_se=e.path_se,
                exposure_coef=e.exposure_coef,
                exposure_se=e.exposure_se,
                iie=e.iie,
                iie_subject_avg=e.iie_subject_avg,
                p_path=e.p_path,
                p_exposure=e.p_exposure,
                p_max=e.p_max,
                p_adjusted=float(q),
                significant=bool(q <= level),
            )
        )
    return tuple(out)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def run_medzisc(dataset: PseudobulkDataset, config: AnalysisConfig | None = None) -> MediationReport:
    """Screen, fit the joint models, and test both pathways per candidate gene."""
    config = config or AnalysisConfig()
    dataset, filter_report = filter_degenerate_genes(dataset)
    start = time.perf_counter()
    screening = screen_mediators(dataset, config)
    outcome_fit, warnings_out = fit_final_models(dataset, screening, config)
    warnings_list = list(warnings_out)
    profile = _covariate_profile(dataset, config)

    m_entries = []
    f_entries = []
    for gene in screening.candidates:
        if screening.m_term.get(gene) and f"M:{gene}" in outcome_fit.names:
            marginal = screening.nb_fits.get(gene)
            if marginal is not None:
                m_entries.append(
                    _gene_entry("M", gene, outcome_fit, marginal, dataset, config, profile, warnings_list)
                )
        if screening.f_term.get(gene) and f"F:{gene}" in outcome_fit.names:
            marginal = screening.beta_fits.get(gene)
            if marginal is not None:
                f_entries.append(
                    _gene_entry("F", gene, outcome_fit, marginal, dataset, config, profile, warnings_list)
                )

    elapsed = time.perf_counter() - start
    return MediationReport(
        method="medzisc",
        outcome_fit=outcome_fit,
        m_results=_apply_bh(m_entries, config.significance_level),
        f_results=_apply_bh(f_entries, config.significance_level),
        screening=screening,
        significance_level=config.significance_level,
        contrast=config.contrast,
        covariate_profile=tuple(profile),
        elapsed_seconds=elapsed,
        removed_genes=filter_report.removed_all_zero,
        warnings=tuple(warnings_list),
    )


def run_naive(dataset: PseudobulkDataset, config: AnalysisConfig | None = None) -> MediationReport:
    """No-screening baseline: per-gene outcome models over every gene.

    Each gene's mean and zero-proportion terms enter its outcome model per
    ``config.naive_terms`` ("separate" fits one outcome model per pathway,
    "joint" puts both terms in a single model). Testing mirrors the main
    procedure: joint-significance per pathway, BH within each family over
    all analyzed genes.
    """
    config = config or AnalysisConfig()
    dataset, filter_report = filter_degenerate_genes(dataset)
    start = time.perf_counter()
    subjects = dataset.subjects
    y = subjects.require_outcome()
    nb_fits, beta_fits, skipped = fit_marginal_models(dataset, config)
    profile = _covariate_profile(dataset, config)
    warnings_list = [f"{g} ({fam}): {reason}" for g, fam, reason in skipped]

    base = [("X", subjects.exposure)]
    base.extend(
        (name, subjects.covariates[:, j])
        for j, name in enumerate(subjects.covariate_names)
    )
    summary_fit = fit_ols(y, build_design(base, intercept=config.include_intercept))

    def outcome_model(gene, j, terms):
        cols = list(base)
        if "M" in terms:
            cols.append((f"M:{gene}", dataset.mean_expr[:, j]))
        if "F" in terms:
            cols.append((f"F:{gene}", dataset.zero_prop[:, j]))
        try:
            return fit_ols(y, build_design(cols, intercept=config.include_intercept))
        except (DomainError, SingularDesignError) as exc:
            warnings_list.append(f"{gene}: outcome model failed ({exc})")
            logger.warning("gene %s: outcome model failed: %s", gene, exc)
            return None

    m_entries = []
    f_entries = []
    for j, gene in enumerate(dataset.gene_names):
        has_f = bool(dataset.f_modeled[j])
        if config.naive_terms == "joint":
            terms = "MF" if has_f else "M"
            fit = outcome_model(gene, j, terms)
            m_fit = f_fit = fit
        else:
            m_fit = outcome_model(gene, j, "M")
            f_fit = outcome_model(gene, j, "F") if has_f else None
        if m_fit is not None and gene in nb_fits:
            m_entries.append(
                _gene_entry("M", gene, m_fit, nb_fits[gene], dataset, config, profile, warnings_list)
            )
        if has_f and f_fit is not None and gene in beta_fits:
            f_entries.append(
                _gene_entry("F", gene, f_fit, beta_fits[gene], dataset, config, profile, warnings_list)
            )

    elapsed = time.perf_counter() - start
    return MediationReport(
        method="naive",
        outcome_fit=summary_fit,
        m_results=_apply_bh(m_entries, config.significance_level),
        f_results=_apply_bh(f_entries, config.significance_level),
        screening=None,
        significance_level=config.significance_level,
        contrast=config.contrast,
        covariate_profile=tuple(profile),
        elapsed_seconds=elapsed,
        removed_genes=filter_report.removed_all_zero,
        warnings=tuple(warnings_list),
    )
