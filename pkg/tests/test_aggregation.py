"""Aggregation, clamping and gene-filtering behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medzisc.data import (
    F_LOWER,
    F_UPPER,
    CellCountMatrix,
    PseudobulkDataset,
    SubjectTable,
    aggregate_pseudobulk,
    clamp_zero_proportion,
    filter_degenerate_genes,
)
from medzisc.exceptions import DomainError, StructureError


def make_subjects(n, seed=0):
    rng = np.random.default_rng(seed)
    return SubjectTable(
        subject_ids=[f"s{i}" for i in range(n)],
        exposure=rng.integers(0, 2, n).astype(float),
        covariates=rng.standard_normal((n, 3)),
    )


class TestClamp:
    def test_interior_unchanged(self):
        assert clamp_zero_proportion(0.5) == 0.5

    def test_lower_bound(self):
        assert clamp_zero_proportion(0.0) == F_LOWER

    def test_upper_bound(self):
        assert clamp_zero_proportion(1.0) == F_UPPER

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            clamp_zero_proportion(-0.01)
        with pytest.raises(DomainError):
            clamp_zero_proportion(1.01)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_idempotent_and_bounded(self, f):
        once = clamp_zero_proportion(f)
        assert F_LOWER <= once <= F_UPPER
        assert clamp_zero_proportion(once) == once

    def test_array_input(self):
        arr = clamp_zero_proportion(np.array([0.0, 0.5, 1.0]))
        assert np.allclose(arr, [F_LOWER, 0.5, F_UPPER])


class TestAggregate:
    def test_single_gene_mean_and_zero_fraction(self):
        subjects = make_subjects(2)
        cells = [
            CellCountMatrix("s0", np.array([[0], [2], [4]]), ("g1",)),
            CellCountMatrix("s1", np.array([[1], [1]]), ("g1",)),
        ]
        ds = aggregate_pseudobulk(cells, subjects)
        assert ds.mean_expr[0, 0] == pytest.approx(2.0)
        assert ds.zero_prop[0, 0] == pytest.approx(1.0 / 3.0)

    def test_all_zero_counts_clamped_high(self):
        subjects = make_subjects(2)
        cells = [
            CellCountMatrix("s0", np.array([[0], [0], [0]]), ("g1",)),
            CellCountMatrix("s1", np.array([[1], [0]]), ("g1",)),
        ]
        ds = aggregate_pseudobulk(cells, subjects)
        assert ds.zero_prop[0, 0] == F_UPPER

    def test_no_zero_counts_clamped_low(self):
        subjects = make_subjects(2)
        cells = [
            CellCountMatrix("s0", np.array([[3], [1]]), ("g1",)),
            CellCountMatrix("s1", np.array([[1], [0]]), ("g1",)),
        ]
        ds = aggregate_pseudobulk(cells, subjects)
        assert ds.zero_prop[0, 0] == F_LOWER

    def test_unequal_cell_counts_use_own_denominator(self):
        subjects = make_subjects(2)
        cells = [
            CellCountMatrix("s0", np.array([[0], [6]]), ("g1",)),
            CellCountMatrix("s1", np.array([[0], [0], [3]]), ("g1",)),
        ]
        ds = aggregate_pseudobulk(cells, subjects)
        assert ds.mean_expr[0, 0] == pytest.approx(3.0)
        assert ds.mean_expr[1, 0] == pytest.approx(1.0)
        assert ds.zero_prop[0, 0] == pytest.approx(0.5)
        assert ds.zero_prop[1, 0] == pytest.approx(2.0 / 3.0)

    def test_permutation_invariant_over_cells(self):
        rng = np.random.default_rng(7)
        subjects = make_subjects(3)
        counts = [rng.poisson(2.0, (20, 5)) for _ in range(3)]
        genes = tuple(f"g{j}" for j in range(5))
        base = aggregate_pseudobulk(
            [CellCountMatrix(f"s{i}", c, genes) for i, c in enumerate(counts)], subjects
        )
        shuffled = aggregate_pseudobulk(
            [
                CellCountMatrix(f"s{i}", c[rng.permutation(c.shape[0])], genes)
                for i, c in enumerate(counts)
            ],
            subjects,
        )
        np.testing.assert_array_equal(base.mean_expr, shuffled.mean_expr)
        np.testing.assert_array_equal(base.zero_prop, shuffled.zero_prop)

    def test_mean_times_cells_matches_column_sums(self):
        # Direct-summation oracle on random small matrices.
        rng = np.random.default_rng(11)
        for trial in range(20):
            n_cells = int(rng.integers(1, 30))
            n_genes = int(rng.integers(1, 8))
            counts = rng.poisson(1.5, (n_cells, n_genes))
            subjects = make_subjects(2, seed=trial)
            genes = tuple(f"g{j}" for j in range(n_genes))
            cells = [
                CellCountMatrix("s0", counts, genes),
                CellCountMatrix("s1", rng.poisson(1.5, (4, n_genes)), genes),
            ]
            ds = aggregate_pseudobulk(cells, subjects)
            sums = np.array([sum(counts[c, j] for c in range(n_cells)) for j in range(n_genes)])
            np.testing.assert_allclose(ds.mean_expr[0] * n_cells, sums, rtol=1e-12)

    def test_zero_prop_always_within_bounds(self):
        rng = np.random.default_rng(3)
        subjects = make_subjects(4)
        genes = tuple(f"g{j}" for j in range(6))
        cells = [
            CellCountMatrix(f"s{i}", rng.poisson(0.3, (15, 6)), genes) for i in range(4)
        ]
        ds = aggregate_pseudobulk(cells, subjects)
        assert ds.zero_prop.min() >= F_LOWER
        assert ds.zero_prop.max() <= F_UPPER

    def test_mismatched_gene_lists_rejected(self):
        subjects = make_subjects(2)
        cells = [
            CellCountMatrix("s0", np.ones((2, 1)), ("g1",)),
            CellCountMatrix("s1", np.ones((2, 1)), ("g2",)),
        ]
        with pytest.raises(StructureError, match="gene list"):
            aggregate_pseudobulk(cells, subjects)

    def test_missing_subject_rejected(self):
        subjects = make_subjects(2)
        cells = [CellCountMatrix("s0", np.ones((2, 1)), ("g1",))]
        with pytest.raises(StructureError, match="s1"):
            aggregate_pseudobulk(cells, subjects)


class TestFilterDegenerateGenes:
    def build(self, mean_expr, zero_prop, f_modeled=None):
        n, g = np.asarray(mean_expr).shape
        subjects = make_subjects(n)
        if f_modeled is None:
            f_modeled = np.ones(g, dtype=bool)
        return PseudobulkDataset(
            subjects=subjects,
            mean_expr=np.asarray(mean_expr, dtype=float),
            zero_prop=np.asarray(zero_prop, dtype=float),
            gene_names=tuple(f"g{j}" for j in range(g)),
            f_modeled=f_modeled,
        )

    def test_all_zero_gene_removed(self):
        ds = self.build([[0.0, 1.0], [0.0, 2.0]], [[0.999, 0.5], [0.999, 0.4]])
        filtered, report = filter_degenerate_genes(ds)
        assert filtered.gene_names == ("g1",)
        assert report.removed_all_zero == ("g0",)

    def test_expressed_everywhere_keeps_gene_without_f(self):
        ds = self.build([[2.0, 1.0], [3.0, 2.0]], [[0.001, 0.5], [0.001, 0.4]])
        filtered, report = filter_degenerate_genes(ds)
        assert filtered.gene_names == ("g0", "g1")
        assert not filtered.f_modeled[0]
        assert filtered.f_modeled[1]
        assert report.zero_prop_degenerate == ("g0",)

    def test_mixed_zeros_untouched(self):
        ds = self.build([[2.0], [3.0]], [[0.2], [0.4]])
        filtered, report = filter_degenerate_genes(ds)
        assert filtered.gene_names == ("g0",)
        assert filtered.f_modeled[0]
        assert not report.any_changes

    def test_idempotent(self):
        ds = self.build(
            [[0.0, 1.0, 2.0], [0.0, 2.0, 3.0]],
            [[0.999, 0.5, 0.001], [0.999, 0.4, 0.001]],
        )
        once, _ = filter_degenerate_genes(ds)
        twice, report = filter_degenerate_genes(once)
        assert twice.gene_names == once.gene_names
        np.testing.assert_array_equal(twice.f_modeled, once.f_modeled)
        np.testing.assert_array_equal(twice.mean_expr, once.mean_expr)
        assert not report.any_changes

    def test_empty_result_permitted(self):
        ds = self.build([[0.0], [0.0]], [[0.999], [0.999]])
        filtered, report = filter_degenerate_genes(ds)
        assert filtered.n_genes == 0
        assert report.removed_all_zero == ("g0",)


class TestSubjectTable:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(StructureError):
            SubjectTable(["a", "a"], np.zeros(2), np.zeros((2, 1)))

    def test_outcome_required_for_analysis(self):
        t = make_subjects(3)
        with pytest.raises(StructureError, match="outcome"):
            t.require_outcome()
        t2 = t.with_outcome(np.arange(3.0))
        np.testing.assert_array_equal(t2.require_outcome(), [0.0, 1.0, 2.0])
