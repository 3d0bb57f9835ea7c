from fractions import Fraction

import pytest

from ratosc.errors import DegreeLimitError
from ratosc.symbolic import (
    ComplexPoly,
    ConstantSet,
    DeformationSpec,
    PhasePolynomial,
    build_constants,
    constant_set,
    deformation_residual,
    general_J3,
    generators,
    match_paper_case,
    momentum_degree,
    poisson_bracket_sym,
    printed_case,
    verify_constancy,
    verify_evolution,
)
from ratosc.symbolic.checks import FACTOR_ODE, HAMILTONIAN_SYSTEM, verify_moduli

(X,), (P,), W, (K,) = generators(1)


class TestBuildConstants:
    def test_labels(self):
        named = build_constants((2, 1))
        for key in ("K_1", "K2_2", "M_1", "K_12", "T_21", "Ttilde_11", "M_22"):
            assert key in named

    def test_iso_fradkin_entry(self):
        named = build_constants((1, 1))
        (x, y), (px, py), w, _ = generators(2)
        k12 = named["K_12"]
        assert k12.re == px * py + w * w * x * y
        assert k12.im == w * (x * py - y * px)

    def test_T_tilde_is_K_pair(self):
        cs = constant_set((3, 2))
        assert cs.T_tilde(0, 1) == cs.K_pair(0, 1)

    def test_T_uses_unit_ratios(self):
        cs = constant_set((2, 1))
        (x, y), (px, py), w, _ = cs.xs, cs.ps, cs.w0, cs.ks
        assert cs.T(0, 1).re == px * py + w * w * x * y

    def test_M_reduces_to_square(self):
        cs = constant_set((3,))
        m = cs.M(0)
        assert ComplexPoly(m.re.set_zero(["k1"]), m.im) == cs.K(0) * cs.K(0)

    def test_diagonal_is_real(self):
        cs = constant_set((2, 3))
        for i in range(2):
            assert cs.M_pair(i, i).im.is_zero()
            assert cs.K_pair(i, i).im.is_zero()

    def test_degree_limit(self):
        with pytest.raises(DegreeLimitError):
            ConstantSet((10, 9), degree_limit=30)
        assert ConstantSet((10, 9)).dof == 2  # degree 38 fits the default limit

    def test_ratio_validation(self):
        with pytest.raises(ValueError):
            ConstantSet((0, 1))
        with pytest.raises(ValueError):
            ConstantSet(())


@pytest.mark.parametrize("ratios", [(1,), (3,), (1, 1), (2, 1), (3, 2), (1, 2, 3)])
def test_constancy(ratios):
    report = verify_constancy(ratios)
    assert report.passed, report.summary()
    assert len(report) == 3 * len(ratios) ** 2


@pytest.mark.parametrize("ratios", [(1,), (3,), (2, 1), (3, 2)])
def test_evolution(ratios):
    report = verify_evolution(ratios)
    assert report.passed, report.summary()


@pytest.mark.parametrize("ratios", [(1,), (4,), (2, 1)])
def test_moduli(ratios):
    assert verify_moduli(ratios).passed


class TestChecksAreNotVacuous:
    def test_M_pair_not_conserved_by_H2(self):
        cs = constant_set((2, 1))
        assert not poisson_bracket_sym(cs.M_pair(0, 1), cs.H2).is_zero()

    def test_swapped_powers_not_conserved(self):
        from ratosc.symbolic.constants import power_product

        cs = constant_set((2, 1))
        wrong = power_product(cs.M(0), cs.M(1), 1, 2)
        assert not poisson_bracket_sym(wrong, cs.H3).is_zero()

    def test_failure_report_carries_residual(self):
        from ratosc.symbolic.checks import CheckResult, Report

        report = Report("probe", [CheckResult.of("x != 0", X)])
        assert not report.passed
        assert report.failures()[0].residual == X
        assert "residual: x1" in report.summary()


class TestDeformation:
    def test_inverse_square_solves_factor_ode(self):
        assert deformation_residual(DeformationSpec(K * X**-2)).is_zero()

    def test_constant_counterexample(self):
        c = PhasePolynomial.constant(1, 3)
        assert deformation_residual(DeformationSpec(c)) == 6

    def test_square_counterexample(self):
        assert deformation_residual(DeformationSpec(X**2)) == 4 * X**2

    def test_hamiltonian_system_solution(self):
        h = K * X**-2
        v = Fraction(1, 2) * K * X**-2
        r = deformation_residual(DeformationSpec((h, v), HAMILTONIAN_SYSTEM))
        assert r[0].is_zero() and r[1].is_zero()

    def test_hamiltonian_system_counterexample(self):
        r = deformation_residual(DeformationSpec((X**2, Fraction(1, 2) * X**2), HAMILTONIAN_SYSTEM))
        assert r[0].is_zero()
        assert r[1] == 8 * X**2

    def test_second_coordinate(self):
        (_, y), _, _, (_, k2) = generators(2)
        assert deformation_residual(DeformationSpec(k2 * y**-2, FACTOR_ODE, 1)).is_zero()

    def test_validation(self):
        (x, y), (px, _), _, _ = generators(2)
        with pytest.raises(ValueError):
            DeformationSpec(x * y)
        with pytest.raises(ValueError):
            DeformationSpec(px * x)
        with pytest.raises(ValueError):
            DeformationSpec(x, "step3")
        with pytest.raises(ValueError):
            DeformationSpec(x, HAMILTONIAN_SYSTEM)
        with pytest.raises(IndexError):
            DeformationSpec(x, FACTOR_ODE, 5)

    @pytest.mark.parametrize(
        "F",
        [K * X**-2, X**2, PhasePolynomial.constant(1, 5), X**-1 + 3 * W * X**3, K * X**-4],
    )
    def test_rotation_law_defect_is_the_ode(self, F):
        """With V = ½n²w²x² + ½F, {A,H} = −2nwB holds identically and
        {B,H} − 2nwA = −nw(xF′ + 2F), so the ODE is exactly the obstruction."""
        n = 3
        h = Fraction(1, 2) * P * P + Fraction(1, 2) * n * n * W * W * X * X + Fraction(1, 2) * F
        a = P * P - n * n * W * W * X * X + F
        b = 2 * n * W * X * P
        assert poisson_bracket_sym(a, h) == -2 * n * W * b
        defect = poisson_bracket_sym(b, h) - 2 * n * W * a
        assert defect == -n * W * deformation_residual(DeformationSpec(F))


@pytest.mark.parametrize("case_id", ["iso_1_1", "aniso_2_1", "aniso_3_1"])
def test_match_printed_case(case_id):
    report = match_paper_case(case_id)
    assert report.passed, report.summary()


def test_case_iii_components_are_all_checked():
    names = [r.name for r in match_paper_case("aniso_3_1")]
    assert sum("component" in n for n in names) == 6


class TestGeneralJ3:
    @pytest.mark.parametrize(
        "ratios, lam, norm",
        [((1, 1), -2, 1), ((2, 1), -8, Fraction(1, 2)), ((3, 1), -2, 1)],
    )
    def test_registry_values(self, ratios, lam, norm):
        gen = general_J3(ratios)
        assert gen.lam == lam
        assert gen.i3_normalizer == norm

    def test_iso_form(self):
        (x, y), _, _, (k1, k2) = generators(2)
        gen = general_J3((1, 1))
        assert gen.J3 == gen.I3**2 + k1 * y**2 * x**-2 + k2 * x**2 * y**-2

    @pytest.mark.parametrize("ratios", [(1, 2), (3, 2), (5, 3), (4, 1)])
    def test_uncatalogued_ratios(self, ratios):
        gen = general_J3(ratios)
        cs = constant_set(ratios)
        from ratosc.symbolic.checks import leading_energy_term

        assert cs.M_pair(0, 1).re == leading_energy_term(cs) + gen.lam * cs.w0**2 * gen.J3
        assert gen.J3.without_strengths() == gen.I3**2
        assert gen.lam < 0

    def test_printed_case_limit(self):
        i3, j3, _ = printed_case("aniso_2_1")
        assert j3.without_strengths() == i3 * i3

    def test_wrong_dof(self):
        with pytest.raises(ValueError):
            general_J3((1, 1, 1))


class TestDegreeClaims:
    @pytest.mark.parametrize("ratios", [(1, 1), (2, 1), (3, 1), (3, 2), (5, 3)])
    def test_pair_degrees(self, ratios):
        cs = constant_set(ratios)
        nx, ny = ratios
        assert momentum_degree(cs.K_pair(0, 1).im) == nx + ny - 1
        assert momentum_degree(cs.M_pair(0, 1).im) == 2 * (nx + ny) - 1

    @pytest.mark.parametrize("ratios", [(1, 1), (2, 1), (3, 1)])
    def test_J3_degree(self, ratios):
        gen = general_J3(ratios)
        assert momentum_degree(gen.J3) == 2 * (sum(ratios) - 1)
        assert momentum_degree(gen.I3) == sum(ratios) - 1
