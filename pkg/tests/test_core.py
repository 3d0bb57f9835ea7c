import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratosc import core
from ratosc.core import CASES, PhaseState, SystemParams
from ratosc.errors import CaseMismatchError, SingularStateError

from conftest import random_state


def one_dof(omega=1.0, n=1, k=0.0, x=0.0, p=0.0):
    return SystemParams(omega, (n,), (k,)), PhaseState((x,), (p,))


ISO_STATE = PhaseState((1.0, 1.0), (0.0, 1.0))


class TestParams:
    def test_lengths_must_match(self):
        with pytest.raises(ValueError):
            SystemParams(1.0, (1, 2), (0.0,))

    @pytest.mark.parametrize("ratios", [(0,), (-1, 1), (1.5,)])
    def test_ratios_positive_integers(self, ratios):
        with pytest.raises(ValueError):
            SystemParams(1.0, ratios, (0.0,) * len(ratios))

    @pytest.mark.parametrize("omega", [0.0, -1.0, float("nan")])
    def test_omega_positive(self, omega):
        with pytest.raises(ValueError):
            SystemParams(omega, (1,), (0.0,))

    def test_no_gcd_reduction(self):
        assert SystemParams(1.0, (4, 2), (0, 0)).ratios == (4, 2)


class TestEnergy:
    @pytest.mark.parametrize(
        "args, expected",
        [
            (dict(n=2, k=1.0, x=1.0), 2.5),
            (dict(n=1, k=0.0, x=0.0), 0.0),
            (dict(n=1, k=1.0, x=1.0), 1.0),
        ],
    )
    def test_examples(self, args, expected):
        params, state = one_dof(**args)
        assert core.energy_i(params, state, 0) == pytest.approx(expected, abs=1e-15)

    def test_singular(self):
        params, state = one_dof(k=1.0, x=0.0)
        with pytest.raises(SingularStateError):
            core.energy_i(params, state, 0)

    def test_index_error(self):
        params, state = one_dof()
        with pytest.raises(IndexError):
            core.energy_i(params, state, 1)

    def test_negative_strength_not_clamped(self):
        params, state = one_dof(k=-4.0, x=1.0)
        assert core.energy_i(params, state, 0) == pytest.approx(0.5 - 2.0)


class TestHamiltonian:
    def test_sum_of_energies(self):
        params = SystemParams(1.0, (2, 1), (1.0, 1.0))
        assert core.hamiltonian(params, PhaseState((1, 1), (0, 0))) == pytest.approx(3.5)

    def test_zero(self):
        params = SystemParams.linear(1.0, (1, 3))
        assert core.hamiltonian(params, PhaseState((0, 0), (0, 0))) == 0.0

    def test_single_dof(self):
        params, state = one_dof(n=3, k=0.2, x=0.7, p=-0.3)
        assert core.hamiltonian(params, state) == core.energy_i(params, state, 0)

    def test_half_trace_of_T(self, rng):
        params = SystemParams.linear(1.3, (1, 1, 1))
        state = random_state(rng, 3)
        trace = sum(core.linear_constant(params, state, i, i).re for i in range(3))
        assert core.hamiltonian(params, state) == pytest.approx(0.5 * trace, rel=1e-14)


class TestFactors:
    def test_linear_examples(self):
        params, state = one_dof(n=2, x=1.0)
        z = core.linear_factor(params, state, 0)
        assert (z.re, z.im) == (0.0, 2.0)
        params, state = one_dof(x=0.0, p=3.0)
        z = core.linear_factor(params, state, 0)
        assert (z.re, z.im) == (3.0, 0.0)
        params, state = one_dof()
        assert core.linear_factor(params, state, 0).modulus2 == 0.0

    def test_linear_ignores_strength(self):
        params, state = one_dof(n=2, k=5.0, x=1.0, p=0.5)
        assert complex(core.linear_factor(params, state, 0)) == complex(0.5, 2.0)

    def test_quadratic_examples(self):
        params, state = one_dof(n=2, x=1.0)
        z = core.quadratic_factor(params, state, 0)
        assert (z.re, z.im) == (-4.0, 0.0)
        params, state = one_dof(x=1.0, p=1.0)
        z = core.quadratic_factor(params, state, 0)
        assert (z.re, z.im) == (0.0, 2.0)

    def test_quadratic_is_square(self, rng):
        params = SystemParams.linear(0.7, (3,))
        for _ in range(20):
            state = random_state(rng, 1)
            k = complex(core.linear_factor(params, state, 0))
            k2 = complex(core.quadratic_factor(params, state, 0))
            assert k2 == pytest.approx(k * k, rel=1e-14)

    def test_deformed_examples(self):
        params, state = one_dof(n=2, k=1.0, x=1.0)
        m = core.deformed_factor(params, state, 0)
        assert (m.re, m.im) == (-3.0, 0.0)
        assert m.modulus2 == pytest.approx(4 * (2.5**2 - 4))
        params, state = one_dof(n=1, k=1.0, x=1.0)
        m = core.deformed_factor(params, state, 0)
        assert m.modulus2 == 0.0

    def test_deformed_reduces_to_quadratic(self, rng):
        params = SystemParams.linear(1.1, (2,))
        state = random_state(rng, 1)
        assert complex(core.deformed_factor(params, state, 0)) == complex(
            core.quadratic_factor(params, state, 0)
        )

    def test_conjugate(self):
        z = core.ComplexObservable(1.5, -2.0, "M_1")
        c = z.conjugate()
        assert (c.re, c.im) == (1.5, 2.0)
        assert c.modulus2 == z.modulus2 == 6.25


class TestConstants:
    def test_iso_angular_momentum_and_fradkin(self):
        params = SystemParams.linear(1.0, (1, 1))
        k = core.linear_constant(params, ISO_STATE, 0, 1)
        assert k.im / params.omega0 == pytest.approx(1.0)
        assert k.re == pytest.approx(1.0)

    def test_2_1_invariant(self):
        params = SystemParams.linear(1.0, (2, 1))
        k = core.linear_constant(params, ISO_STATE, 0, 1)
        assert k.im / (2 * params.omega0) == pytest.approx(0.0, abs=1e-15)

    def test_deformed_examples(self):
        params = SystemParams.linear(1.0, (1, 1))
        assert complex(core.deformed_factor(params, ISO_STATE, 0)) == -1
        assert complex(core.deformed_factor(params, ISO_STATE, 1)) == 2j
        m = core.deformed_constant(params, ISO_STATE, 0, 1)
        assert complex(m) == pytest.approx(2j)
        ex, ey = (core.energy_i(params, ISO_STATE, i) for i in range(2))
        assert m.re == pytest.approx(4 * ex * ey - 2 * 1.0 * 1.0, abs=1e-15)

        params = SystemParams(1.0, (1, 1), (1.0, 0.0))
        assert complex(core.deformed_constant(params, ISO_STATE, 0, 1)) == 0

    @pytest.mark.parametrize("ratios", [(1, 1), (2, 1), (3, 2)])
    def test_diagonal_real(self, rng, ratios):
        params = SystemParams(1.0, ratios, (0.4, 1.2))
        for _ in range(10):
            state = random_state(rng, 2)
            for i in range(2):
                assert core.deformed_constant(params, state, i, i).im == 0.0
                assert core.linear_constant(params, state, i, i).im == 0.0

    def test_fradkin_reduction(self, rng):
        params = SystemParams.linear(1.7, (1, 1, 1))
        state = random_state(rng, 3)
        x, p = state.positions, state.momenta
        for i in range(3):
            for j in range(3):
                f = p[i] * p[j] + params.omega0**2 * x[i] * x[j]
                assert core.linear_constant(params, state, i, j).re == pytest.approx(f, rel=1e-13)

    def test_deformed_constant_singular(self):
        params = SystemParams(1.0, (1, 1), (1.0, 0.0))
        with pytest.raises(SingularStateError):
            core.deformed_constant(params, PhaseState((0.0, 1.0), (1.0, 0.0)), 0, 1)


def _moduli_gap(params, state, i):
    m = core.deformed_factor(params, state, i)
    e = core.energy_i(params, state, i)
    rhs = 4 * (e * e - params.strengths[i] * params.ratios[i] ** 2 * params.omega0**2)
    return abs(m.modulus2 - rhs) / max(1.0, 4 * e * e)


@settings(max_examples=200, deadline=None)
@given(
    omega=st.floats(0.1, 3.0),
    n=st.integers(1, 6),
    k=st.floats(-3.0, 3.0),
    x=st.floats(0.2, 3.0),
    sign=st.sampled_from([-1.0, 1.0]),
    p=st.floats(-3.0, 3.0),
)
def test_moduli_identity_property(omega, n, k, x, sign, p):
    params, state = one_dof(omega, n, k, sign * x, p)
    assert _moduli_gap(params, state, 0) < 1e-12


class TestCaseFormulas:
    def test_registry_values(self):
        assert [CASES[c].lam for c in ("iso_1_1", "aniso_2_1", "aniso_3_1")] == [-2, -8, -2]
        assert [CASES[c].i3_normalizer for c in ("iso_1_1", "aniso_2_1", "aniso_3_1")] == [1, 0.5, 1]
        assert len(CASES["aniso_3_1"].j3_terms) == 7

    def test_iso_examples(self):
        case = CASES["iso_1_1"]
        params = SystemParams.linear(1.0, (1, 1))
        assert core.paper_invariant_J3(case, params, ISO_STATE) == pytest.approx(1.0)
        assert core.extract_J3(case, params, ISO_STATE) == pytest.approx(1.0)
        params = SystemParams(1.0, (1, 1), (1.0, 0.0))
        assert core.paper_invariant_J3(case, params, ISO_STATE) == pytest.approx(2.0)
        assert core.extract_J3(case, params, ISO_STATE) == pytest.approx(2.0)

    def test_2_1_linear_example(self):
        case = CASES["aniso_2_1"]
        params = SystemParams.linear(1.0, (2, 1))
        assert core.paper_invariant_J3(case, params, ISO_STATE) == pytest.approx(0.0, abs=1e-15)

    def test_i3_matches_normalized_im_K(self, rng):
        for case in CASES.values():
            params = SystemParams.linear(1.3, case.ratios)
            for _ in range(10):
                state = random_state(rng, 2)
                k = core.linear_constant(params, state, 0, 1)
                expected = float(case.i3_normalizer) / params.omega0 * k.im
                assert core.linear_invariant_I3(case, params, state) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_case_mismatch(self):
        with pytest.raises(CaseMismatchError):
            core.paper_invariant_J3(CASES["iso_1_1"], SystemParams.linear(1.0, (2, 1)), ISO_STATE)
        with pytest.raises(CaseMismatchError):
            core.extract_J3(CASES["aniso_3_1"], SystemParams.linear(1.0, (2, 1)), ISO_STATE)

    def test_singular(self):
        params = SystemParams(1.0, (2, 1), (1.0, 1.0))
        with pytest.raises(SingularStateError):
            core.paper_invariant_J3(CASES["aniso_2_1"], params, PhaseState((0.0, 1.0), (1.0, 1.0)))

    @pytest.mark.parametrize("case_id", sorted(CASES))
    def test_extract_matches_printed_formula(self, case_id):
        """Case-table consistency over 1000 random regular states."""
        case = CASES[case_id]
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(1000):
            omega = rng.uniform(0.5, 2.0)
            params = SystemParams(omega, case.ratios, tuple(rng.uniform(-2.0, 2.0, size=2)))
            state = random_state(rng, 2)
            a = core.paper_invariant_J3(case, params, state)
            b = core.extract_J3(case, params, state)
            nx, ny = case.ratios
            ex, ey = (core.energy_i(params, state, i) for i in range(2))
            # cancellation in Re(M_xy) - leading term sets the floating-point scale
            scale = max(abs(a), (2 ** (nx + ny) * abs(ex) ** ny * abs(ey) ** nx) / (abs(float(case.lam)) * omega**2))
            worst = max(worst, abs(a - b) / scale)
        assert worst < 1e-10
