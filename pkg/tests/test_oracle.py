import math

import numpy as np
import pytest

from graphdtn import (
    PivotBreakdown,
    count_below,
    counting_function,
    discretize,
    metric_graph,
    report_points_json,
    report_table,
    segment,
    verify_counting_bounds,
    verify_neumann_dirichlet_count,
    verify_robin_count,
)
from graphdtn.oracle import _Chain


def analytic_segment_count(length, lam, bc):
    """Counts from the explicit segment spectra (n*pi/L)^2."""
    count = 0
    n = 1 if bc == "dirichlet" else 0
    while (n * math.pi / length) ** 2 < lam:
        count += 1
        n += 1
    return count


STAR = metric_graph([(0, 1, 1.0), (0, 2, 0.7), (0, 3, 1.3)], boundary=(1, 2, 3))


class TestDiscretize:
    def test_neumann_stiffness_annihilates_constants(self):
        op = discretize(segment(1.0), "neumann", 16)
        row_sums = np.asarray(op.stiffness.sum(axis=1)).ravel()
        assert np.max(np.abs(row_sums)) < 1e-12

    def test_dirichlet_removes_boundary_dofs(self):
        free = discretize(segment(1.0), "neumann", 16)
        clamped = discretize(segment(1.0), "dirichlet", 16)
        assert clamped.n_dof == free.n_dof - 2
        assert clamped.vertex_ids == ()

    def test_robin_zero_equals_neumann_bitwise(self):
        free = discretize(STAR, "neumann", 16)
        robin = discretize(STAR, "robin", 16, robin_a=0.0)
        assert (free.stiffness != robin.stiffness).nnz == 0
        assert (free.mass != robin.mass).nnz == 0

    def test_robin_adds_to_boundary_stiffness_diagonal(self):
        free = discretize(STAR, "neumann", 16)
        robin = discretize(STAR, "robin", 16, robin_a=2.5)
        bump = (robin.stiffness - free.stiffness).toarray()
        expected = np.zeros_like(bump)
        for v in STAR.boundary:
            i = robin.vertex_ids.index(v) + robin.n_dof - len(robin.vertex_ids)
            expected[i, i] = 2.5
        assert np.max(np.abs(bump - expected)) == 0.0
        assert (robin.mass != free.mass).nnz == 0

    def test_mass_is_positive_definite(self):
        op = discretize(STAR, "neumann", 16)
        eigs = np.linalg.eigvalsh(op.mass.toarray())
        assert eigs[0] > 0

    def test_matrices_are_symmetric(self):
        op = discretize(STAR, "robin", 16, robin_a=1.5)
        assert abs(op.stiffness - op.stiffness.T).max() == 0.0
        assert abs(op.mass - op.mass.T).max() == 0.0

    def test_element_counts_scale_with_reference_parameter(self):
        coarse = discretize(segment(1.0), "neumann", 16, lambda_ref=0.0)
        fine = discretize(segment(1.0), "neumann", 16, lambda_ref=30.0)
        assert fine.chains[0].n_elements > coarse.chains[0].n_elements

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError, match="bc"):
            discretize(segment(1.0), "free", 16)
        with pytest.raises(ValueError, match="resolution"):
            discretize(segment(1.0), "neumann", 2)
        with pytest.raises(ValueError, match="robin"):
            discretize(segment(1.0), "robin", 16, robin_a=-1.0)


class TestCountBelow:
    def test_segment_against_dense_solves(self, rng):
        import scipy.linalg

        for lam in rng.uniform(0.3, 40.0, size=8):
            op = discretize(STAR, "neumann", 8, lambda_ref=lam)
            dense = scipy.linalg.eigh(
                op.stiffness.toarray(), op.mass.toarray(), eigvals_only=True
            )
            assert count_below(op, lam) == int((dense < lam).sum())

    def test_segment_examples(self):
        assert count_below(discretize(segment(1.0), "dirichlet", 16, lambda_ref=1.0), 1.0) == 0
        assert count_below(discretize(segment(1.0), "neumann", 16, lambda_ref=1.0), 1.0) == 1

    def test_nonnegative_operators_have_empty_negative_spectrum(self, corpus):
        for bc in ("neumann", "dirichlet"):
            for _, g in corpus:
                assert count_below(discretize(g, bc, 16), -1.0) == 0

    def test_monotone_in_lambda(self):
        op = discretize(segment(1.0), "neumann", 32, lambda_ref=30.0)
        counts = [count_below(op, lam) for lam in np.linspace(0.3, 60.0, 23)]
        assert counts == sorted(counts)

    def test_orientation_flip_does_not_change_counts(self):
        from graphdtn import flip_edge

        for lam in (2.0, 14.0):
            baseline = count_below(discretize(STAR, "neumann", 16, lambda_ref=lam), lam)
            for e in STAR.edges:
                flipped = discretize(flip_edge(STAR, e.id), "neumann", 16, lambda_ref=lam)
                assert count_below(flipped, lam) == baseline

    def test_engineered_zero_pivot_breaks_down(self):
        # resolution 8 on a unit edge puts the first interior pivot of
        # K - lam*M at exactly zero when lam = 3/h^2 = 192
        op = discretize(segment(1.0), "dirichlet", 8)
        assert op.chains == (_Chain(8, 0.125, None, None),)
        with pytest.raises(PivotBreakdown):
            count_below(op, 192.0)


class TestCountingFunction:
    @pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
    @pytest.mark.parametrize("length", [1.0, 0.7])
    def test_matches_analytic_segment_counts(self, bc, length):
        for lam in np.linspace(0.4, 35.0, 18):
            gaps = [abs(lam - (n * math.pi / length) ** 2) for n in range(8)]
            if min(gaps) < 0.25:
                continue
            count, stable, _ = counting_function(segment(length), bc, lam)
            assert stable
            assert count == analytic_segment_count(length, lam, bc)

    def test_known_counts(self):
        assert counting_function(segment(1.0), "neumann", 15.0)[0] == 2
        assert counting_function(STAR, "neumann", 1e-6)[0] == 1
        assert counting_function(STAR, "dirichlet", -3.0)[0] == 0

    def test_reports_resolutions_used(self):
        count, stable, resolutions = counting_function(segment(1.0), "neumann", 15.0)
        assert stable
        assert len(resolutions) >= 3
        assert resolutions[1] == 2 * resolutions[0]

    def test_robin_counts_decrease_with_parameter(self, corpus):
        for _, g in corpus:
            for lam in (2.0, 11.0):
                na = counting_function(g, "robin", lam, robin_a=0.5)[0]
                nb = counting_function(g, "robin", lam, robin_a=2.0)[0]
                assert na >= nb

    def test_robin_zero_equals_neumann(self):
        for lam in (1.0, 7.3):
            assert (
                counting_function(segment(1.0), "robin", lam, robin_a=0.0)[0]
                == counting_function(segment(1.0), "neumann", lam)[0]
            )


class TestVerifiers:
    def test_segment_identity_at_unit_parameter(self):
        report = verify_neumann_dirichlet_count(segment(1.0), 1.0)
        assert report.verdict == "pass"
        assert report.neumann_count == 1
        assert report.dirichlet_count == 0
        assert report.dtn_count == 1
        assert report.stable and not report.perturbed

    def test_segment_identity_below_zero(self):
        report = verify_neumann_dirichlet_count(segment(1.0), -1.0)
        assert report.verdict == "pass"
        assert report.counts == {"N_neumann": 0, "N_dirichlet": 0, "dtn": 0}

    def test_identity_on_corpus_spot_checks(self, corpus):
        for lam in (0.9, 4.4, 17.3):
            for _, g in corpus:
                report = verify_neumann_dirichlet_count(g, lam)
                assert report.verdict == "pass", (lam, report)

    def test_point_at_an_eigenvalue_is_skipped_not_failed(self):
        report = verify_neumann_dirichlet_count(segment(1.0), math.pi ** 2)
        assert report.verdict == "skipped"
        assert report.detail

    def test_robin_pair_on_segment(self):
        report = verify_robin_count(segment(1.0), 1.0, 0.4, 0.7)
        assert report.verdict == "pass"
        assert report.robin_a_count - report.robin_b_count == 1
        assert report.dtn_count == 1

    def test_robin_pair_with_window_below_spectrum(self):
        # R(1) of segment(1) has eigenvalues around -0.546 and 1.830
        report = verify_robin_count(segment(1.0), 1.0, 2.0, 3.0)
        assert report.verdict == "pass"
        assert report.dtn_count == 0

    def test_robin_pair_rejects_bad_levels(self):
        with pytest.raises(ValueError):
            verify_robin_count(segment(1.0), 1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            verify_robin_count(segment(1.0), 1.0, -0.5, 1.0)

    def test_bounds_on_segment_grid(self):
        grid = np.linspace(0.5, 25.0, 9)
        report = verify_counting_bounds(segment(1.0), grid)
        assert report.passed
        assert report.segment_interlacing is True
        for point in report.points:
            if point.verdict == "pass":
                gap = point.neumann_count - point.dirichlet_count
                assert 0 <= gap <= 2

    def test_bounds_interlacing_only_for_single_segments(self, corpus):
        report = verify_counting_bounds(STAR, [1.0, 3.0])
        assert report.segment_interlacing is None
        assert report.passed


class TestReportFormats:
    def test_json_schema(self):
        import json

        points = [
            verify_neumann_dirichlet_count(segment(1.0), 1.0),
            verify_robin_count(segment(1.0), 1.0, 0.5, 2.0),
        ]
        doc = json.loads(report_points_json(points))
        assert set(doc) == {"points"}
        assert len(doc["points"]) == 2
        first = doc["points"][0]
        assert first["verdict"] == "pass"
        assert first["lambda"] == 1.0
        assert "counts" in first and "N_neumann" in first["counts"]

    def test_table_lists_each_point(self):
        points = [verify_neumann_dirichlet_count(segment(1.0), lam) for lam in (0.5, 1.5)]
        table = report_table(points)
        lines = table.strip().splitlines()
        assert len(lines) == 3
        assert "verdict" in lines[0]
        assert all("pass" in line for line in lines[1:])
