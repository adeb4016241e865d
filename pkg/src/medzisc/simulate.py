"""Synthetic benchmark data: ZINB cell counts plus a linear outcome.

Each replicate draws a binary exposure and standard-normal covariates per
subject, picks a sparse set of true mediator genes, and generates cell-level
counts from a zero-inflated negative binomial whose zero-probability and
count-mean parameters respond to the exposure on the logit and log scales.
The outcome is a linear combination of exposure, covariates and the
aggregated co-mediators of the true genes.

Randomness is organized as named substreams keyed by (seed, replicate,
purpose[, subject]), so replicates and subjects can be generated in any
order, or in parallel, with identical results.
"""

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import expit

from .data import CellCountMatrix, SubjectTable, aggregate_pseudobulk
from .exceptions import ConfigError, DomainError

MEDIATOR_TYPES = ("none", "both", "m_only", "f_only")

# Substream labels; subjects get (replicate, _STREAM_CELLS, subject_index).
_STREAM_SUBJECTS = 0
_STREAM_TRUTH = 1
_STREAM_CELLS = 2
_STREAM_OUTCOME = 3


def _as_range(value, name):
    try:
        low, high = (float(value[0]), float(value[1]))
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"{name} must be a [low, high] pair") from None
    if not (np.isfinite(low) and np.isfinite(high)) or low > high:
        raise ConfigError(f"{name} must be a finite pair with low <= high")
    return (low, high)


@dataclass(frozen=True)
class ScenarioConfig:
    """Generator parameters for one simulation cell.

    ``split`` gives the fraction of true mediators acting through both
    pathways, through mean expression only, and through the zero proportion
    only. The single-pathway exposure ranges are routed to the matching
    exposure parameter (count-mean effect for mean-only mediators,
    zero-probability effect for zero-proportion-only mediators);
    ``literal_assignment=True`` swaps that routing.
    """

    n_subjects: int
    cells_per_subject: int
    n_genes: int
    n_true_mediators: int | None = None  # defaults to min(8, n_genes)
    split: tuple = (0.375, 0.25, 0.375)
    both_alpha_x: tuple = (1.0, 2.0)
    both_gamma_x: tuple = (2.0, 6.0)
    both_beta_m: tuple = (4.0, 5.0)
    both_beta_f: tuple = (12.0, 14.0)
    m_only_exposure: tuple = (1.0, 1.5)
    m_only_beta_m: tuple = (5.0, 8.0)
    f_only_exposure: tuple = (1.8, 3.0)
    f_only_beta_f: tuple = (10.0, 15.0)
    literal_assignment: bool = False
    alpha_z: float = 0.1
    gamma_z: float = 0.3
    beta_x: float = 3.0
    beta_z: tuple = (0.5, -0.3, 0.2)
    dispersion_range: tuple = (0.6, 1.2)
    noise_sd: float = 0.5
    seed: int = 0
    replicate_count: int = 1

    def __post_init__(self):
        for name in ("n_subjects", "cells_per_subject", "n_genes", "replicate_count"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.n_true_mediators is None:
            object.__setattr__(self, "n_true_mediators", min(8, self.n_genes))
        if self.n_true_mediators < 0 or self.n_true_mediators > self.n_genes:
            raise ConfigError("n_true_mediators must lie in [0, n_genes]")
        split = tuple(float(v) for v in self.split)
        if len(split) != 3 or any(v < 0 for v in split):
            raise ConfigError("split must be three nonnegative fractions")
        if abs(sum(split) - 1.0) > 1e-9:
            raise ConfigError(f"split must sum to 1, got {sum(split):g}")
        object.__setattr__(self, "split", split)
        for name in (
            "both_alpha_x",
            "both_gamma_x",
            "both_beta_m",
            "both_beta_f",
            "m_only_exposure",
            "m_only_beta_m",
            "f_only_exposure",
            "f_only_beta_f",
            "dispersion_range",
        ):
            object.__setattr__(self, name, _as_range(getattr(self, name), name))
        if self.dispersion_range[0] <= 0:
            raise ConfigError("dispersion_range must be positive")
        object.__setattr__(self, "beta_z", tuple(float(v) for v in self.beta_z))
        if not self.beta_z:
            raise ConfigError("beta_z needs at least one covariate coefficient")
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be nonnegative")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n_covariates(self) -> int:
        return len(self.beta_z)

    def type_counts(self) -> tuple:
        """Largest-remainder apportionment of n_true_mediators over the split."""
        raw = np.array(self.split) * self.n_true_mediators
        base = np.floor(raw).astype(int)
        short = self.n_true_mediators - int(base.sum())
        order = np.argsort(-(raw - base), kind="stable")
        for idx in order[:short]:
            base[idx] += 1
        return tuple(int(v) for v in base)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, value in d.items():
            if isinstance(value, tuple):
                d[key] = list(value)
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError("unknown config keys: " + ", ".join(sorted(unknown)))
        missing = [k for k in ("n_subjects", "cells_per_subject", "n_genes") if k not in raw]
        if missing:
            raise ConfigError("missing required config keys: " + ", ".join(missing))
        return cls(**raw)


@dataclass(frozen=True)
class SimulationTruth:
    """Ground-truth mediator labels and generator coefficients, one entry per gene."""

    gene_names: tuple
    mediator_type: tuple
    alpha_x: np.ndarray
    gamma_x: np.ndarray
    beta_m: np.ndarray
    beta_f: np.ndarray
    dispersion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gene_names", tuple(self.gene_names))
        object.__setattr__(self, "mediator_type", tuple(self.mediator_type))
        g = len(self.gene_names)
        for name in ("alpha_x", "gamma_x", "beta_m", "beta_f", "dispersion"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (g,):
                raise DomainError(f"{name} must have one value per gene")
            object.__setattr__(self, name, arr)
        bad = [t for t in self.mediator_type if t not in MEDIATOR_TYPES]
        if bad:
            raise DomainError(f"unknown mediator types: {sorted(set(bad))}")

    def genes_of_type(self, *types) -> tuple:
        return tuple(
            name for name, t in zip(self.gene_names, self.mediator_type) if t in types
        )

    @property
    def m_family(self) -> tuple:
        """True mediators acting through mean expression: both-path plus mean-only."""
        return self.genes_of_type("both", "m_only")

    @property
    def f_family(self) -> tuple:
        """True mediators acting through the zero proportion: both-path plus zero-only."""
        return self.genes_of_type("both", "f_only")


@dataclass(frozen=True)
class SimulatedDataset:
    """One generated replicate: subjects (with outcome), cells, and the truth."""

    subjects: SubjectTable
    cells: tuple
    truth: SimulationTruth

    def aggregate(self):
        return aggregate_pseudobulk(self.cells, self.subjects)


def _stream(seed: int, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def sample_zinb(mu: float, delta: float, pi_zero: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` zero-inflated NB values: zero with probability pi_zero,
    otherwise an NB(mu, delta) count with variance mu + mu^2/delta."""
    if not (np.isfinite(mu) and mu > 0):
        raise DomainError("mu must be positive and finite")
    if not (np.isfinite(delta) and delta > 0):
        raise DomainError("delta must be positive and finite")
    if not (0.0 <= pi_zero <= 1.0):
        raise DomainError("pi_zero must lie in [0, 1]")
    if count < 1:
        raise DomainError("count must be at least 1")
    lam = rng.gamma(shape=delta, scale=mu / delta, size=count)
    draws = rng.poisson(lam)
    structural = rng.random(count) < pi_zero
    draws[structural] = 0
    return draws


def _sample_zinb_matrix(mu, delta, pi_zero, n_cells, rng):
    """Vectorized ZINB draws for one subject: (n_cells, n_genes)."""
    g = mu.shape[0]
    lam = rng.gamma(shape=delta, scale=mu / delta, size=(n_cells, g))
    draws = rng.poisson(lam)
    structural = rng.random((n_cells, g)) < pi_zero
    draws[structural] = 0
    return draws


def draw_truth(config: ScenarioConfig, rng: np.random.Generator) -> SimulationTruth:
    """Assign mediator types and draw generator coefficients for one replicate."""
    g = config.n_genes
    gene_names = tuple(f"gene_{j + 1:04d}" for j in range(g))
    dispersion = rng.uniform(*config.dispersion_range, size=g)
    types = ["none"] * g
    alpha_x = np.zeros(g)
    gamma_x = np.zeros(g)
    beta_m = np.zeros(g)
    beta_f = np.zeros(g)

    n_both, n_m_only, n_f_only = config.type_counts()
    chosen = rng.choice(g, size=config.n_true_mediators, replace=False)
    labels = ["both"] * n_both + ["m_only"] * n_m_only + ["f_only"] * n_f_only
    for idx, label in zip(chosen, labels):
        types[idx] = label
        if label == "both":
            alpha_x[idx] = rng.uniform(*config.both_alpha_x)
            gamma_x[idx] = rng.uniform(*config.both_gamma_x)
            beta_m[idx] = rng.uniform(*config.both_beta_m)
            beta_f[idx] = rng.uniform(*config.both_beta_f)
        elif label == "m_only":
            draw = rng.uniform(*config.m_only_exposure)
            if config.literal_assignment:
                alpha_x[idx] = draw
            else:
                gamma_x[idx] = draw
            beta_m[idx] = rng.uniform(*config.m_only_beta_m)
        else:
            draw = rng.uniform(*config.f_only_exposure)
            if config.literal_assignment:
                gamma_x[idx] = draw
            else:
                alpha_x[idx] = draw
            beta_f[idx] = rng.uniform(*config.f_only_beta_f)

    return SimulationTruth(
        gene_names=gene_names,
        mediator_type=tuple(types),
        alpha_x=alpha_x,
        gamma_x=gamma_x,
        beta_m=beta_m,
        beta_f=beta_f,
        dispersion=dispersion,
    )


def simulate_outcome(
    truth: SimulationTruth,
    mean_expr: np.ndarray,
    zero_prop: np.ndarray,
    subjects: SubjectTable,
    noise_sd: float,
    rng: np.random.Generator,
    beta_x: float = 3.0,
    beta_z=(0.5, -0.3, 0.2),
) -> np.ndarray:
    """Linear outcome over exposure, covariates and the aggregated co-mediators.

    Inactive mediator coefficients are exactly zero, so only true mediators
    contribute. With noise_sd = 0 the result is the deterministic linear
    predictor.
    """
    beta_z = np.asarray(beta_z, dtype=float)
    linear = (
        beta_x * subjects.exposure
        + subjects.covariates @ beta_z
        + mean_expr @ truth.beta_m
        + zero_prop @ truth.beta_f
    )
    if noise_sd > 0:
        linear = linear + rng.normal(0.0, noise_sd, size=subjects.n_subjects)
    return linear


def generate_replicate(config: ScenarioConfig, replicate: int) -> SimulatedDataset:
    """Generate one fully reproducible replicate of the scenario.

    The same (config, replicate) pair always yields a bitwise-identical
    dataset, regardless of how other replicates are scheduled.
    """
    if replicate < 0:
        raise DomainError("replicate index must be nonnegative")
    n, c, k = config.n_subjects, config.cells_per_subject, config.n_covariates
    seed = config.seed

    rng_subj = _stream(seed, replicate, _STREAM_SUBJECTS)
    exposure = (rng_subj.random(n) < 0.5).astype(float)
    covariates = rng_subj.standard_normal((n, k))
    subject_ids = tuple(f"subj_{i + 1:04d}" for i in range(n))

    truth = draw_truth(config, _stream(seed, replicate, _STREAM_TRUTH))

    cells = []
    zsum = covariates.sum(axis=1)
    for i in range(n):
        rng_i = _stream(seed, replicate, _STREAM_CELLS, i)
        pi_i = expit(truth.alpha_x * exposure[i] + config.alpha_z * zsum[i])
        mu_i = np.exp(truth.gamma_x * exposure[i] + config.gamma_z * zsum[i])
        counts = _sample_zinb_matrix(mu_i, truth.dispersion, pi_i, c, rng_i)
        cells.append(CellCountMatrix(subject_ids[i], counts, truth.gene_names))

    subjects = SubjectTable(
        subject_ids=subject_ids, exposure=exposure, covariates=covariates
    )
    pseudobulk = aggregate_pseudobulk(cells, subjects)
    outcome = simulate_outcome(
        truth,
        pseudobulk.mean_expr,
        pseudobulk.zero_prop,
        subjects,
        config.noise_sd,
        _stream(seed, replicate, _STREAM_OUTCOME),
        beta_x=config.beta_x,
        beta_z=config.beta_z,
    )
    return SimulatedDataset(
        subjects=subjects.with_outcome(outcome),
        cells=tuple(cells),
        truth=truth,
    )
