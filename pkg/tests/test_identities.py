"""Identity verifiers: eigenpair relations, closed-form identities, spectrum."""

import json
from fractions import Fraction as F

import numpy as np
import pytest

from krallzeros import (
    FamilySpec,
    IdentityReport,
    build_family,
    default_grid,
    discriminate_variants,
    eigenvalue,
    equally_spaced_nodes,
    spectrum_report,
    verify_family_identity,
    verify_fourth_order,
    verify_power,
    verify_eigenpairs,
    zeros,
)

KLEG1 = FamilySpec("krall-legendre", alpha=1)
KLAG1 = FamilySpec("krall-laguerre", alpha=1)
KJAC11 = FamilySpec("krall-jacobi", alpha=1, mass=1)
KRALL_SPECS = [KLEG1, KLAG1, KJAC11]


class TestTheorem1:
    @pytest.mark.parametrize("spec", KRALL_SPECS)
    def test_exact_engine_residual_is_zero(self, spec):
        # the eigenpair relation is polynomial algebra in the nodes, so the
        # exact engine must return literally zero whatever the node error
        report = verify_eigenpairs(spec, 6)
        assert report.max_residual == 0.0
        assert report.rowsum_residual == 0.0
        assert report.passed

    def test_float_engine_small_case(self):
        report = verify_eigenpairs(KLAG1, 3, arithmetic="float")
        assert report.max_residual < 1e-8
        assert report.passed

    def test_cells_cover_grid(self):
        n = 4
        report = verify_eigenpairs(KLEG1, n)
        assert len(report.cells) == n * n
        assert {c["m"] for c in report.cells} == set(range(n))
        assert {c["n"] for c in report.cells} == set(range(1, n + 1))

    def test_top_degree_eigenpair_reported(self):
        n = 5
        report = verify_eigenpairs(KLAG1, n)
        top = [e for e in report.eigenpairs if e["m"] == n - 1]
        assert len(top) == 1
        assert top[0]["eigenvalue"] == float(eigenvalue(KLAG1, n - 1))
        assert top[0]["residual"] <= report.tolerance

    def test_rowsum_reported_separately(self):
        report = verify_eigenpairs(KJAC11, 5)
        assert report.rowsum_residual is not None
        assert report.rowsum_tolerance == 1e-9
        assert report.rowsum_passed

    def test_classical_families_covered(self):
        report = verify_eigenpairs(FamilySpec("hermite"), 6)
        assert report.max_residual == 0.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            verify_eigenpairs(KLEG1, 0)
        with pytest.raises(ValueError):
            verify_eigenpairs(KLEG1, 3, arithmetic="quantum")


class TestPower:
    def test_exponent_one_reproduces_eigenpair_check(self):
        base = verify_eigenpairs(KLEG1, 4)
        powered = verify_power(KLEG1, 4, exponent=1)
        assert powered.max_residual == base.max_residual == 0.0

    def test_square_exact(self):
        report = verify_power(KLEG1, 4, exponent=2)
        assert report.max_residual == 0.0
        assert report.params["exponent"] == "2"

    def test_square_float(self):
        report = verify_power(KLEG1, 4, exponent=2, arithmetic="float")
        assert report.max_residual < 1e-6

    def test_squared_row_sums_vanish(self):
        report = verify_power(KJAC11, 5, exponent=2)
        zero_rows = [c for c in report.cells if c["m"] == 0]
        assert all(c["residual"] == 0.0 for c in zero_rows)

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            verify_power(KLEG1, 8, exponent=200)


class TestKrall4:
    @pytest.mark.parametrize("spec", KRALL_SPECS)
    def test_small_cases(self, spec):
        report = verify_fourth_order(spec, 3)
        assert report.passed
        assert report.max_residual < 1e-7

    def test_jacobi_example(self):
        report = verify_fourth_order(KJAC11, 3)
        assert report.max_residual < 1e-7

    def test_equivalence_with_general_assembly(self):
        # both sides must be rearrangements of the eigenpair relation
        for spec in KRALL_SPECS:
            report = verify_fourth_order(spec, 6)
            assert report.extras["cross_check_lhs_vs_general"] < 1e-9
            assert report.extras["cross_check_rhs_vs_general"] < 1e-9

    def test_classical_rejected(self):
        with pytest.raises(ValueError):
            verify_fourth_order(FamilySpec("hermite"), 4)

    def test_larger_grid(self):
        report = verify_fourth_order(KLAG1, 12)
        assert report.passed, report.max_residual


class TestFamilyIdentity:
    def test_legendre_printed_passes(self):
        report = verify_family_identity(KLEG1, 3, variant="printed")
        assert report.passed
        assert report.max_residual < 1e-7
        assert any("coincide" in note for note in report.notes)

    def test_jacobi_row_sum_reduction(self):
        # m = 0 cells reduce to the row-sum identity
        report = verify_family_identity(FamilySpec("krall-jacobi", alpha=0, mass=1), 2)
        assert all(c["residual"] < 1e-9 for c in report.cells if c["m"] == 0)
        assert report.passed

    def test_laguerre_discrimination(self):
        outcome = discriminate_variants(KLAG1, 3)
        assert outcome["verdict"] == "corrected"
        assert not outcome["printed"].passed
        assert outcome["corrected"].passed

    @pytest.mark.parametrize("alpha", [F(1, 2), F(1), F(2)])
    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_laguerre_verdict_stable(self, alpha, n):
        outcome = discriminate_variants(FamilySpec("krall-laguerre", alpha=alpha), n)
        assert outcome["verdict"] == "corrected", (alpha, n)

    def test_legendre_eigenvalue_expansion_consistent(self):
        # the identity quotes the eigenvalue by its expanded polynomial form
        for alpha in (F(1), F(2), F(1, 2)):
            spec = FamilySpec("krall-legendre", alpha=alpha)
            for m in range(8):
                assert eigenvalue(spec, m) == m * (m + 1) * (m * m + m + 4 * alpha - 2)

    def test_non_krall_rejected(self):
        with pytest.raises(ValueError):
            verify_family_identity(FamilySpec("laguerre", alpha=1), 3)
        with pytest.raises(ValueError):
            verify_family_identity(KLAG1, 3, variant="guessed")


class TestSpectrum:
    @pytest.mark.parametrize("spec", KRALL_SPECS)
    def test_family_zeros(self, spec):
        report = spectrum_report(spec, 6)
        assert report.max_residual < 1e-8
        assert report.passed

    @pytest.mark.parametrize("spec", KRALL_SPECS)
    def test_equally_spaced_nodes(self, spec):
        nodes = equally_spaced_nodes(spec, 6)
        report = spectrum_report(spec, 6, nodes=nodes, tolerance=1e-6)
        assert report.max_residual < 1e-6

    def test_single_node(self):
        report = spectrum_report(KLEG1, 1)
        assert report.eigenpairs == [{"m": 0, "eigenvalue": 0.0, "residual": 0.0}]

    def test_size_mismatch_rejected(self):
        nodes = equally_spaced_nodes(KLEG1, 4)
        with pytest.raises(ValueError):
            spectrum_report(KLEG1, 5, nodes=nodes)


class TestReportSerialization:
    def test_round_trip(self):
        for report in (
            verify_eigenpairs(KLAG1, 3),
            verify_fourth_order(KJAC11, 3),
            verify_family_identity(KLAG1, 3, variant="printed"),
            spectrum_report(KLEG1, 4),
        ):
            wire = json.dumps(report.to_dict())
            recovered = IdentityReport.from_dict(json.loads(wire))
            assert recovered == report

    def test_dict_shape(self):
        payload = verify_eigenpairs(KLAG1, 2).to_dict()
        assert set(payload) == {"meta", "results", "summary"}
        assert payload["meta"]["family"] == "krall-laguerre"
        assert payload["meta"]["N"] == 2
        for cell in payload["results"]:
            assert set(cell) == {"identity", "m", "n", "residual", "pass"}


def test_default_grid_contents():
    grid = default_grid()
    assert len(grid) == 10
    families = {s.family for s in grid}
    assert families == {"krall-legendre", "krall-laguerre", "krall-jacobi"}


def test_theorem3_tracks_theorem1_residuals():
    # the closed-form identity is the eigenpair relation rearranged, so the
    # two residual grids must agree to within a small factor of rounding
    spec = KLAG1
    n = 6
    closed = verify_fourth_order(spec, n)
    member = build_family(spec, n)[n]
    nodes = zeros(member, spec)
    assert closed.extras["cross_check_lhs_vs_general"] < 10 * 1e-10
    assert len(nodes) == n
