"""Core data containers and pseudobulk aggregation.

Cell-level count matrices are collapsed per subject into two co-mediator
features per gene: the mean expression across cells and the proportion of
cells with a zero count. Zero proportions are clamped away from the unit
interval's endpoints so they remain valid responses for beta regression.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DomainError, StructureError

# Clamping bounds for zero proportions; proportions at exactly 0 or 1 break
# the beta likelihood.
F_LOWER = 0.001
F_UPPER = 0.999


@dataclass(frozen=True)
class SubjectTable:
    """Per-subject exposure, covariates and (optionally) outcome.

    Parameters
    ----------
    subject_ids : sequence of str
        Unique subject identifiers, one per row.
    exposure : ndarray, shape (n,)
        Exposure value per subject (binary 0/1 in simulations, any real
        value is accepted).
    covariates : ndarray, shape (n, k)
        Adjustment covariates; every subject must have the same k.
    outcome : ndarray, shape (n,), optional
        Continuous outcome. May be absent until analysis time.
    covariate_names : sequence of str, optional
        Defaults to Z1..Zk.
    """

    subject_ids: tuple
    exposure: np.ndarray
    covariates: np.ndarray
    outcome: np.ndarray | None = None
    covariate_names: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "subject_ids", tuple(str(s) for s in self.subject_ids))
        exposure = np.asarray(self.exposure, dtype=float)
        covariates = np.asarray(self.covariates, dtype=float)
        if covariates.ndim == 1:
            covariates = covariates[:, None]
        object.__setattr__(self, "exposure", exposure)
        object.__setattr__(self, "covariates", covariates)
        n = len(self.subject_ids)
        if len(set(self.subject_ids)) != n:
            raise StructureError("duplicate subject identifiers")
        if exposure.shape != (n,):
            raise StructureError(f"exposure must have shape ({n},), got {exposure.shape}")
        if covariates.shape[0] != n:
            raise StructureError("covariates row count does not match subjects")
        if not np.all(np.isfinite(exposure)) or not np.all(np.isfinite(covariates)):
            raise StructureError("exposure and covariates must be finite for every subject")
        if not self.covariate_names:
            names = tuple(f"Z{j + 1}" for j in range(covariates.shape[1]))
            object.__setattr__(self, "covariate_names", names)
        else:
            object.__setattr__(self, "covariate_names", tuple(self.covariate_names))
        if len(self.covariate_names) != covariates.shape[1]:
            raise StructureError("covariate_names length does not match covariate columns")
        if self.outcome is not None:
            outcome = np.asarray(self.outcome, dtype=float)
            if outcome.shape != (n,):
                raise StructureError(f"outcome must have shape ({n},), got {outcome.shape}")
            object.__setattr__(self, "outcome", outcome)

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]

    def with_outcome(self, outcome: np.ndarray) -> "SubjectTable":
        """Return a copy with the outcome column filled in."""
        return replace(self, outcome=np.asarray(outcome, dtype=float))

    def require_outcome(self) -> np.ndarray:
        if self.outcome is None:
            raise StructureError("outcome Y is required but missing from the subject table")
        if not np.all(np.isfinite(self.outcome)):
            raise StructureError("outcome Y contains non-finite values")
        return self.outcome


@dataclass(frozen=True)
class CellCountMatrix:
    """Cell-by-gene expression counts for one subject.

    Counts are nonnegative; integer counts are the normal case but
    real-valued (e.g. log-normalized) matrices are accepted on ingestion,
    with exact zeros treated as zeros.
    """

    subject_id: str
    counts: np.ndarray
    gene_names: tuple

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2:
            raise StructureError("counts must be a 2-d cells x genes matrix")
        if counts.shape[0] < 1:
            raise StructureError(f"subject {self.subject_id!r} has no cells")
        if not np.all(np.isfinite(counts)):
            raise StructureError(f"subject {self.subject_id!r} has non-finite counts")
        if np.any(counts < 0):
            raise StructureError(f"subject {self.subject_id!r} has negative counts")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "gene_names", tuple(self.gene_names))
        if counts.shape[1] != len(self.gene_names):
            raise StructureError(
                f"subject {self.subject_id!r}: {counts.shape[1]} count columns but "
                f"{len(self.gene_names)} gene names"
            )

    @property
    def n_cells(self) -> int:
        return self.counts.shape[0]


@dataclass(frozen=True)
class PseudobulkDataset:
    """Subject-level co-mediators: mean expression and clamped zero proportion.

    ``mean_expr[i, g]`` is the average count of gene g over subject i's
    cells; ``zero_prop[i, g]`` is the fraction of that subject's cells with
    a zero count, clamped into [F_LOWER, F_UPPER]. ``f_modeled[g]`` is False
    when the raw zero proportion was degenerate (identical 0 or identical 1
    across all subjects), in which case the zero-proportion pathway is
    dropped for that gene.
    """

    subjects: SubjectTable
    mean_expr: np.ndarray
    zero_prop: np.ndarray
    gene_names: tuple
    f_modeled: np.ndarray

    def __post_init__(self):
        mean_expr = np.asarray(self.mean_expr, dtype=float)
        zero_prop = np.asarray(self.zero_prop, dtype=float)
        f_modeled = np.asarray(self.f_modeled, dtype=bool)
        object.__setattr__(self, "mean_expr", mean_expr)
        object.__setattr__(self, "zero_prop", zero_prop)
        object.__setattr__(self, "f_modeled", f_modeled)
        object.__setattr__(self, "gene_names", tuple(self.gene_names))
        n = self.subjects.n_subjects
        g = len(self.gene_names)
        if n < 2:
            raise StructureError("pseudobulk dataset needs at least 2 subjects")
        if mean_expr.shape != (n, g) or zero_prop.shape != (n, g):
            raise StructureError(
                f"mean/zero matrices must both be shaped ({n}, {g}); got "
                f"{mean_expr.shape} and {zero_prop.shape}"
            )
        if f_modeled.shape != (g,):
            raise StructureError("f_modeled must have one flag per gene")
        if g and np.any(mean_expr < 0):
            raise StructureError("mean expression must be nonnegative")
        if g and (zero_prop.min() < F_LOWER or zero_prop.max() > F_UPPER):
            raise StructureError(
                f"zero proportions must lie in [{F_LOWER}, {F_UPPER}]; clamp first"
            )

    @property
    def n_subjects(self) -> int:
        return self.subjects.n_subjects

    @property
    def n_genes(self) -> int:
        return len(self.gene_names)

    def gene_index(self, name: str) -> int:
        try:
            return self.gene_names.index(name)
        except ValueError:
            raise KeyError(f"unknown gene {name!r}") from None


@dataclass(frozen=True)
class GeneFilterReport:
    """Genes dropped or flagged by :func:`filter_degenerate_genes`."""

    removed_all_zero: tuple = ()
    zero_prop_degenerate: tuple = ()

    @property
    def any_changes(self) -> bool:
        return bool(self.removed_all_zero or self.zero_prop_degenerate)


def clamp_zero_proportion(f):
    """Clamp a zero proportion (scalar or array) into [F_LOWER, F_UPPER].

    Idempotent; raises DomainError for values outside [0, 1].
    """
    arr = np.asarray(f, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or not np.all(np.isfinite(arr)):
        raise DomainError("zero proportion must lie in [0, 1]")
    clamped = np.clip(arr, F_LOWER, F_UPPER)
    if np.isscalar(f) or np.ndim(f) == 0:
        return float(clamped)
    return clamped


def aggregate_pseudobulk(
    cells: Sequence[CellCountMatrix] | Mapping[str, CellCountMatrix],
    subjects: SubjectTable,
) -> PseudobulkDataset:
    """Collapse cell-level counts into subject-level co-mediators.

    Every subject in ``subjects`` must have exactly one count matrix and all
    matrices must share an identical gene list. Each subject's mean and zero
    proportion use that subject's own cell count, so unequal cell numbers
    across subjects are fine. Aggregation is deterministic and invariant to
    the order of cells within a subject.
    """
    if isinstance(cells, Mapping):
        by_subject = {str(k): v for k, v in cells.items()}
    else:
        by_subject = {}
        for cm in cells:
            if cm.subject_id in by_subject:
                raise StructureError(f"duplicate count matrix for subject {cm.subject_id!r}")
            by_subject[cm.subject_id] = cm

    missing = [s for s in subjects.subject_ids if s not in by_subject]
    if missing:
        raise StructureError("missing cell counts for subjects: " + ", ".join(missing))
    extra = set(by_subject) - set(subjects.subject_ids)
    if extra:
        raise StructureError(
            "cell counts for unknown subjects: " + ", ".join(sorted(extra))
        )

    gene_names = by_subject[subjects.subject_ids[0]].gene_names
    for sid in subjects.subject_ids:
        if by_subject[sid].gene_names != gene_names:
            raise StructureError(
                f"gene list for subject {sid!r} differs from the first subject's"
            )

    n = subjects.n_subjects
    g = len(gene_names)
    mean_expr = np.empty((n, g))
    raw_zero = np.empty((n, g))
    for i, sid in enumerate(subjects.subject_ids):
        counts = by_subject[sid].counts
        mean_expr[i] = counts.mean(axis=0)
        raw_zero[i] = np.mean(counts == 0, axis=0)

    # Degeneracy is judged on the raw proportions, before clamping.
    f_modeled = ~(np.all(raw_zero == 0.0, axis=0) | np.all(raw_zero == 1.0, axis=0))
    zero_prop = clamp_zero_proportion(raw_zero) if g else raw_zero
    return PseudobulkDataset(
        subjects=subjects,
        mean_expr=mean_expr,
        zero_prop=zero_prop,
        gene_names=gene_names,
        f_modeled=f_modeled,
    )


def filter_degenerate_genes(
    dataset: PseudobulkDataset,
) -> tuple[PseudobulkDataset, GeneFilterReport]:
    """Drop genes with no expression anywhere; flag zero-proportion-degenerate genes.

    Genes whose mean expression is 0 for every subject are removed outright.
    Genes whose zero proportion sits at the same clamping bound for every
    subject keep their mean-expression column but have ``f_modeled`` forced
    to False, since a constant response cannot be regressed. Idempotent; an
    empty gene set is a valid result.
    """
    if dataset.n_genes == 0:
        return dataset, GeneFilterReport()

    keep = ~np.all(dataset.mean_expr == 0.0, axis=0)
    at_lower = np.all(dataset.zero_prop <= F_LOWER, axis=0)
    at_upper = np.all(dataset.zero_prop >= F_UPPER, axis=0)
    f_modeled = dataset.f_modeled & ~at_lower & ~at_upper

    removed = tuple(n for n, k in zip(dataset.gene_names, keep) if not k)
    degenerate = tuple(
        n
        for n, k, fm, was in zip(dataset.gene_names, keep, f_modeled, dataset.f_modeled)
        if k and was and not fm
    )
    report = GeneFilterReport(removed_all_zero=removed, zero_prop_degenerate=degenerate)
    if not report.any_changes and np.array_equal(f_modeled, dataset.f_modeled):
        return dataset, report

    filtered = PseudobulkDataset(
        subjects=dataset.subjects,
        mean_expr=dataset.mean_expr[:, keep],
        zero_prop=dataset.zero_prop[:, keep],
        gene_names=tuple(n for n, k in zip(dataset.gene_names, keep) if k),
        f_modeled=f_modeled[keep],
    )
    return filtered, report
