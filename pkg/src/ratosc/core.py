"""Parameters, phase states and numeric evaluation of the factorization quantities.

Everything here works in plain floating point with unit mass, so the
velocities of the Lagrangian picture are the momenta ``p_i``.  Indices are
zero-based throughout the Python API; labels use the one-based physics
names (``M_12`` is ``deformed_constant(params, state, 0, 1)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import CaseMismatchError, SingularStateError

__all__ = [
    "SystemParams",
    "PhaseState",
    "ComplexObservable",
    "CaseFormula",
    "J3Term",
    "CASES",
    "get_case",
    "energy_i",
    "hamiltonian",
    "linear_factor",
    "linear_constant",
    "quadratic_factor",
    "deformed_factor",
    "deformed_constant",
    "linear_invariant_I3",
    "paper_invariant_J3",
    "extract_J3",
]


@dataclass(frozen=True)
class SystemParams:
    """Base frequency, integer frequency ratios and centrifugal strengths.

    With all strengths zero this is the rational anisotropic oscillator; with
    all ratios one as well it is the isotropic oscillator.
    """

    omega0: float
    ratios: tuple[int, ...]
    strengths: tuple[float, ...]

    def __post_init__(self) -> None:
        ratios = tuple(self.ratios)
        strengths = tuple(float(k) for k in self.strengths)
        if len(ratios) == 0:
            raise ValueError("at least one degree of freedom is required")
        if len(ratios) != len(strengths):
            raise ValueError(
                f"ratios ({len(ratios)}) and strengths ({len(strengths)}) differ in length"
            )
        for n in ratios:
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise ValueError(f"frequency ratios must be positive integers, got {n!r}")
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be finite and > 0, got {self.omega0!r}")
        object.__setattr__(self, "ratios", tuple(int(n) for n in ratios))
        object.__setattr__(self, "strengths", strengths)
        object.__setattr__(self, "omega0", float(self.omega0))

    @property
    def dof(self) -> int:
        return len(self.ratios)

    @classmethod
    def linear(cls, omega0: float, ratios: Sequence[int]) -> "SystemParams":
        """Parameters with every strength set to zero."""
        return cls(omega0, tuple(ratios), (0.0,) * len(ratios))

    def with_strengths(self, strengths: Sequence[float]) -> "SystemParams":
        return SystemParams(self.omega0, self.ratios, tuple(strengths))


@dataclass(frozen=True)
class PhaseState:
    positions: tuple[float, ...]
    momenta: tuple[float, ...]

    def __post_init__(self) -> None:
        positions = tuple(float(v) for v in self.positions)
        momenta = tuple(float(v) for v in self.momenta)
        if len(positions) != len(momenta):
            raise ValueError("positions and momenta must have equal length")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "momenta", momenta)

    @property
    def dof(self) -> int:
        return len(self.positions)

    def as_vector(self) -> list[float]:
        """Concatenated ``(x_1..x_n, p_1..p_n)``."""
        return [*self.positions, *self.momenta]

    @classmethod
    def from_vector(cls, values: Sequence[float]) -> "PhaseState":
        values = list(values)
        if len(values) % 2:
            raise ValueError("phase vector must have even length")
        n = len(values) // 2
        return cls(tuple(values[:n]), tuple(values[n:]))


@dataclass(frozen=True)
class ComplexObservable:
    re: float
    im: float
    label: str = ""

    @property
    def modulus2(self) -> float:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "ComplexObservable":
        return ComplexObservable(self.re, -self.im, self.label + "*")

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def from_complex(cls, z: complex, label: str = "") -> "ComplexObservable":
        return cls(float(z.real), float(z.imag), label)


def _check_compatible(params: SystemParams, state: PhaseState) -> None:
    if state.dof != params.dof:
        raise ValueError(f"state has {state.dof} degrees of freedom, params have {params.dof}")


def _check_index(params: SystemParams, i: int) -> None:
    if not 0 <= i < params.dof:
        raise IndexError(f"index {i} out of range for {params.dof} degrees of freedom")


def _centrifugal(params: SystemParams, state: PhaseState, i: int) -> float:
    """k_i / x_i**2, raising on the singular set."""
    k = params.strengths[i]
    if k == 0.0:
        return 0.0
    x = state.positions[i]
    if x == 0.0:
        raise SingularStateError(f"x_{i + 1} = 0 with k_{i + 1} = {k}")
    return k / (x * x)


def _prepare(params: SystemParams, state: PhaseState, *indices: int) -> None:
    _check_compatible(params, state)
    for i in indices:
        _check_index(params, i)


def energy_i(params: SystemParams, state: PhaseState, i: int) -> float:
    """Partial energy ``p²/2 + ω₀²n²x²/2 + k/(2x²)`` of degree of freedom ``i``."""
    _prepare(params, state, i)
    x, p = state.positions[i], state.momenta[i]
    w = params.omega0 * params.ratios[i]
    return 0.5 * p * p + 0.5 * w * w * x * x + 0.5 * _centrifugal(params, state, i)


def hamiltonian(params: SystemParams, state: PhaseState) -> float:
    _check_compatible(params, state)
    return math.fsum(energy_i(params, state, i) for i in range(params.dof))


def _linear(params: SystemParams, state: PhaseState, i: int) -> complex:
    return complex(state.momenta[i], params.ratios[i] * params.omega0 * state.positions[i])


def _deformed(params: SystemParams, state: PhaseState, i: int) -> complex:
    x, p = state.positions[i], state.momenta[i]
    w = params.ratios[i] * params.omega0
    return complex(p * p - w * w * x * x + _centrifugal(params, state, i), 2.0 * w * x * p)


def linear_factor(params: SystemParams, state: PhaseState, i: int) -> ComplexObservable:
    """K_i = p_i + i n_i ω₀ x_i (the strengths are ignored)."""
    _prepare(params, state, i)
    return ComplexObservable.from_complex(_linear(params, state, i), f"K_{i + 1}")


def _power_product(zi: complex, zj: complex, ni: int, nj: int, diagonal: bool) -> complex:
    if diagonal:
        # z^n conj(z)^n is real; compute it that way so Im is exactly zero
        return complex(abs(zi) ** (2 * ni), 0.0)
    return zi**nj * zj.conjugate() ** ni


def linear_constant(params: SystemParams, state: PhaseState, i: int, j: int) -> ComplexObservable:
    """K_ij = K_i^{n_j} (K_j*)^{n_i}."""
    _prepare(params, state, i, j)
    z = _power_product(
        _linear(params, state, i),
        _linear(params, state, j),
        params.ratios[i],
        params.ratios[j],
        i == j,
    )
    return ComplexObservable.from_complex(z, f"K_{i + 1}{j + 1}")


def quadratic_factor(params: SystemParams, state: PhaseState, i: int) -> ComplexObservable:
    """K2_i = K_i**2 written out component-wise."""
    _prepare(params, state, i)
    x, p = state.positions[i], state.momenta[i]
    w = params.ratios[i] * params.omega0
    return ComplexObservable(p * p - w * w * x * x, 2.0 * w * x * p, f"K2_{i + 1}")


def deformed_factor(params: SystemParams, state: PhaseState, i: int) -> ComplexObservable:
    """M_i = (p_i² − n_i²ω₀²x_i² + k_i/x_i²) + 2i n_i ω₀ x_i p_i."""
    _prepare(params, state, i)
    return ComplexObservable.from_complex(_deformed(params, state, i), f"M_{i + 1}")


def deformed_constant(params: SystemParams, state: PhaseState, i: int, j: int) -> ComplexObservable:
    """M_ij = M_i^{n_j} (M_j*)^{n_i}; real on the diagonal."""
    _prepare(params, state, i, j)
    z = _power_product(
        _deformed(params, state, i),
        _deformed(params, state, j),
        params.ratios[i],
        params.ratios[j],
        i == j,
    )
    return ComplexObservable.from_complex(z, f"M_{i + 1}{j + 1}")


# ---------------------------------------------------------------------------
# Printed closed forms for the three low-order two-dimensional cases.
# Evaluators take (omega0, x, y, px, py) and return the k-free coefficient
# multiplying k1**a * k2**b in J3.

Evaluator = Callable[[float, float, float, float, float], float]


@dataclass(frozen=True)
class J3Term:
    k1_power: int
    k2_power: int
    evaluate: Evaluator
    name: str


@dataclass(frozen=True)
class CaseFormula:
    """One registered two-dimensional case with its printed J3 expansion.

    ``i3_normalizer`` is the rational ``c`` such that ``I3 = c/ω₀ · Im(K_xy)``.
    ``Re(M_xy) = 2^(n_x+n_y) E_x^{n_y} E_y^{n_x} + lam ω₀² J3`` holds exactly.
    """

    case_id: str
    ratios: tuple[int, int]
    lam: Fraction
    i3_normalizer: Fraction
    i3: Evaluator
    j3_terms: tuple[J3Term, ...] = field(repr=False)

    def check_params(self, params: SystemParams) -> None:
        if params.ratios != self.ratios:
            raise CaseMismatchError(
                f"case {self.case_id} needs ratios {self.ratios}, got {params.ratios}"
            )


def _i3_iso(w, x, y, px, py):
    return x * py - y * px


def _i3_21(w, x, y, px, py):
    return (x * py - y * px) * py - w * w * x * y * y


def _i3_31(w, x, y, px, py):
    return 3.0 * (x * py - y * px) * py * py + w * w * (y * px - 9.0 * x * py) * y * y


def _squared(f: Evaluator) -> Evaluator:
    def g(w, x, y, px, py):
        v = f(w, x, y, px, py)
        return v * v

    return g


CASES: dict[str, CaseFormula] = {
    "iso_1_1": CaseFormula(
        "iso_1_1",
        (1, 1),
        Fraction(-2),
        Fraction(1),
        _i3_iso,
        (
            J3Term(0, 0, _squared(_i3_iso), "I3^2"),
            J3Term(1, 0, lambda w, x, y, px, py: (y / x) ** 2, "J3^(10)"),
            J3Term(0, 1, lambda w, x, y, px, py: (x / y) ** 2, "J3^(01)"),
        ),
    ),
    "aniso_2_1": CaseFormula(
        "aniso_2_1",
        (2, 1),
        Fraction(-8),
        Fraction(1, 2),
        _i3_21,
        (
            J3Term(0, 0, _squared(_i3_21), "I3^2"),
            J3Term(1, 0, lambda w, x, y, px, py: (y * y / (x * x)) * py * py, "J3^(10)"),
            J3Term(
                0, 1, lambda w, x, y, px, py: (y * px - 2.0 * x * py) ** 2 / (2.0 * y * y), "J3^(01)"
            ),
            J3Term(1, 1, lambda w, x, y, px, py: 1.0 / (2.0 * x * x), "J3^(11)"),
            J3Term(0, 2, lambda w, x, y, px, py: x * x / y**4, "J3^(02)"),
        ),
    ),
    "aniso_3_1": CaseFormula(
        "aniso_3_1",
        (3, 1),
        Fraction(-2),
        Fraction(1),
        _i3_31,
        (
            J3Term(0, 0, _squared(_i3_31), "I3^2"),
            J3Term(
                1, 0, lambda w, x, y, px, py: (y * y / (x * x)) * (3 * py * py - w * w * y * y) ** 2,
                "J3^(10)",
            ),
            J3Term(
                0,
                1,
                lambda w, x, y, px, py: 3.0
                / (y * y)
                * (2 * y * px * py - 3 * x * py * py + 3 * w * w * x * y * y) ** 2,
                "J3^(01)",
            ),
            J3Term(1, 1, lambda w, x, y, px, py: 12.0 * py * py / (x * x), "J3^(11)"),
            J3Term(0, 2, lambda w, x, y, px, py: 3.0 / y**4 * (3 * x * py - y * px) ** 2, "J3^(02)"),
            J3Term(1, 2, lambda w, x, y, px, py: 3.0 / (x * x * y * y), "J3^(12)"),
            J3Term(0, 3, lambda w, x, y, px, py: 9.0 * x * x / y**6, "J3^(03)"),
        ),
    ),
}


def get_case(case_id: str) -> CaseFormula:
    try:
        return CASES[case_id]
    except KeyError:
        raise KeyError(f"unknown case {case_id!r}; known: {sorted(CASES)}") from None


def case_for_ratios(ratios: Sequence[int]) -> CaseFormula | None:
    for case in CASES.values():
        if case.ratios == tuple(ratios):
            return case
    return None


def _case_args(case: CaseFormula, params: SystemParams, state: PhaseState):
    case.check_params(params)
    _check_compatible(params, state)
    (x, y), (px, py) = state.positions, state.momenta
    k1, k2 = params.strengths
    if (k1 != 0.0 and x == 0.0) or (k2 != 0.0 and y == 0.0):
        raise SingularStateError("J3 evaluated on the singular set")
    return params.omega0, x, y, px, py


def linear_invariant_I3(case: CaseFormula, params: SystemParams, state: PhaseState) -> float:
    """The printed I3 polynomial of the associated linear system."""
    case.check_params(params)
    _check_compatible(params, state)
    (x, y), (px, py) = state.positions, state.momenta
    return case.i3(params.omega0, x, y, px, py)


def paper_invariant_J3(case: CaseFormula, params: SystemParams, state: PhaseState) -> float:
    """J3 = I3² + Σ k1^a k2^b J3^(ab), evaluated term by term."""
    args = _case_args(case, params, state)
    k1, k2 = params.strengths
    terms = []
    for term in case.j3_terms:
        # a zero strength kills the term even where its coefficient is singular
        weight = (k1**term.k1_power) * (k2**term.k2_power)
        if weight != 0.0:
            terms.append(weight * term.evaluate(*args))
    return math.fsum(terms)


def extract_J3(case: CaseFormula, params: SystemParams, state: PhaseState) -> float:
    """J3 recovered from Re(M_xy) via ``(Re M_xy − 2^(n_x+n_y) E_x^{n_y} E_y^{n_x}) / (λω₀²)``."""
    _case_args(case, params, state)
    nx, ny = params.ratios
    re_mxy = deformed_constant(params, state, 0, 1).re
    ex, ey = energy_i(params, state, 0), energy_i(params, state, 1)
    leading = 2.0 ** (nx + ny) * ex**ny * ey**nx
    return (re_mxy - leading) / (float(case.lam) * params.omega0**2)
