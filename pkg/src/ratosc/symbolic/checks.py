"""Exact zero-polynomial verification of the superintegrability identities."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence, Union

from ..errors import NormalizationError
from .constants import DEFAULT_DEGREE_LIMIT, ConstantSet, constant_set
from .poly import ComplexPoly, PhasePolynomial, differentiate, poisson_bracket_sym

__all__ = [
    "CheckResult",
    "Report",
    "DeformationSpec",
    "J3Expansion",
    "verify_constancy",
    "verify_evolution",
    "deformation_residual",
    "printed_case",
    "match_paper_case",
    "general_J3",
]

Residual = Union[PhasePolynomial, ComplexPoly, tuple]


def _is_zero(r) -> bool:
    if isinstance(r, tuple):
        return all(_is_zero(x) for x in r)
    return r.is_zero()


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: Residual | None = None
    details: str = ""

    @classmethod
    def of(cls, name: str, residual: Residual, details: str = "") -> "CheckResult":
        ok = _is_zero(residual)
        return cls(name, ok, None if ok else residual, details)


@dataclass
class Report:
    title: str
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, result: CheckResult) -> None:
        self.results.append(result)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def __iter__(self) -> Iterator[CheckResult]:
        return iter(self.results)

    def __len__(self) -> int:
        return len(self.results)

    def summary(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.results:
            lines.append(f"  [{'ok' if r.passed else 'FAIL'}] {r.name}")
            if not r.passed:
                lines.append(f"      residual: {r.residual}")
        return "\n".join(lines)


def _pairs(dof: int):
    return [(i, j) for i in range(dof) for j in range(dof)]


def verify_constancy(
    ratios: Sequence[int], degree_limit: int = DEFAULT_DEGREE_LIMIT
) -> Report:
    """Check {M_ij, H3}, {K_ij, H2} and {T_ij, H1} vanish for every ordered pair."""
    cs = constant_set(tuple(ratios), degree_limit)
    report = Report(f"constancy ratios={cs.ratios}")
    for i, j in _pairs(cs.dof):
        tag = f"{i + 1}{j + 1}"
        report.add(CheckResult.of(f"{{M_{tag}, H3}} = 0", poisson_bracket_sym(cs.M_pair(i, j), cs.H3)))
        report.add(CheckResult.of(f"{{K_{tag}, H2}} = 0", poisson_bracket_sym(cs.K_pair(i, j), cs.H2)))
        report.add(CheckResult.of(f"{{T_{tag}, H1}} = 0", poisson_bracket_sym(cs.T(i, j), cs.H1)))
    return report


def _rotation(z: ComplexPoly, rate: PhasePolynomial) -> ComplexPoly:
    """i * rate * z."""
    return ComplexPoly(-rate * z.im, rate * z.re)


def verify_evolution(
    ratios: Sequence[int], degree_limit: int = DEFAULT_DEGREE_LIMIT
) -> Report:
    """Check the phase-rotation laws of K_i, K2_i and M_i.

    {K_i, H2} = i n_i w0 K_i, {K2_i, H2} = 2i n_i w0 K2_i, {M_i, H3} = 2i n_i w0 M_i,
    and M_i with k_i = 0 is K2_i = K_i**2.
    """
    cs = constant_set(tuple(ratios), degree_limit)
    report = Report(f"evolution ratios={cs.ratios}")
    w = cs.w0
    for i, n in enumerate(cs.ratios):
        lbl = i + 1
        report.add(
            CheckResult.of(
                f"{{K_{lbl}, H2}} = i n w0 K_{lbl}",
                poisson_bracket_sym(cs.K(i), cs.H2) - _rotation(cs.K(i), n * w),
            )
        )
        report.add(
            CheckResult.of(
                f"{{K2_{lbl}, H2}} = 2i n w0 K2_{lbl}",
                poisson_bracket_sym(cs.K2(i), cs.H2) - _rotation(cs.K2(i), 2 * n * w),
            )
        )
        report.add(
            CheckResult.of(
                f"{{M_{lbl}, H3}} = 2i n w0 M_{lbl}",
                poisson_bracket_sym(cs.M(i), cs.H3) - _rotation(cs.M(i), 2 * n * w),
            )
        )
        m0 = cs.M(i)
        k0 = ComplexPoly(m0.re.set_zero([f"k{lbl}"]), m0.im.set_zero([f"k{lbl}"]))
        report.add(CheckResult.of(f"M_{lbl}|k=0 = K_{lbl}^2", k0 - cs.K(i) * cs.K(i)))
        report.add(CheckResult.of(f"K2_{lbl} = K_{lbl}^2", cs.K2(i) - cs.K(i) * cs.K(i)))
    return report


def verify_moduli(ratios: Sequence[int], degree_limit: int = DEFAULT_DEGREE_LIMIT) -> Report:
    """|M_i|² − 4(E_i² − k_i n_i² w0²) is the zero polynomial."""
    cs = constant_set(tuple(ratios), degree_limit)
    report = Report(f"moduli ratios={cs.ratios}")
    w = cs.w0
    for i, n in enumerate(cs.ratios):
        e = cs.energy(i)
        residual = cs.M(i).modulus2() - 4 * (e * e - cs.ks[i] * n * n * w * w)
        report.add(CheckResult.of(f"|M_{i + 1}|^2 = 4(E_{i + 1}^2 - k n^2 w0^2)", residual))
    return report


# ---------------------------------------------------------------------------
# Deformation conditions


FACTOR_ODE = "factor_ode"
HAMILTONIAN_SYSTEM = "hamiltonian_system"


@dataclass(frozen=True)
class DeformationSpec:
    """A trial deformation depending on the single position ``x_{index+1}``.

    ``factor_ode``: ``candidate`` is F and the residual is ``x F' + 2F``.
    ``hamiltonian_system``: ``candidate`` is the pair ``(h, V)`` and the
    residuals are ``(h' - 2V', 4h + x h' + 2x V')``.
    """

    candidate: Union[PhasePolynomial, tuple[PhasePolynomial, PhasePolynomial]]
    which_condition: str = FACTOR_ODE
    index: int = 0

    def __post_init__(self) -> None:
        if self.which_condition not in (FACTOR_ODE, HAMILTONIAN_SYSTEM):
            raise ValueError(f"unknown condition {self.which_condition!r}")
        polys = self.polys()
        if self.which_condition == HAMILTONIAN_SYSTEM and len(polys) != 2:
            raise ValueError("the Hamiltonian system needs an (h, V) pair")
        if self.which_condition == FACTOR_ODE and len(polys) != 1:
            raise ValueError("the factor ODE takes a single candidate F")
        for poly in polys:
            n = poly.dof
            if not 0 <= self.index < n:
                raise IndexError(f"index {self.index} out of range")
            for exps in poly.terms:
                for g, e in enumerate(exps[: 2 * n]):
                    if e and g != self.index:
                        raise ValueError(
                            "candidate must depend on x_i alone (plus parameters)"
                        )

    def polys(self) -> tuple[PhasePolynomial, ...]:
        if isinstance(self.candidate, PhasePolynomial):
            return (self.candidate,)
        return tuple(self.candidate)


def deformation_residual(spec: DeformationSpec):
    """Residual polynomial(s); zero exactly when the candidate solves the condition."""
    polys = spec.polys()
    n = polys[0].dof
    x = PhasePolynomial.generator(n, f"x{spec.index + 1}")
    d = lambda f: differentiate(f, spec.index)  # noqa: E731
    if spec.which_condition == FACTOR_ODE:
        (f,) = polys
        return x * d(f) + 2 * f
    h, v = polys
    return (d(h) - 2 * d(v), 4 * h + x * d(h) + 2 * x * d(v))


# ---------------------------------------------------------------------------
# J3: printed closed forms and the general construction


class J3Expansion(NamedTuple):
    lam: Fraction
    J3: PhasePolynomial
    I3: PhasePolynomial
    i3_normalizer: Fraction  # I3 = i3_normalizer / w0 * Im(K_xy)


def printed_case(case_id: str) -> tuple[PhasePolynomial, PhasePolynomial, dict[tuple[int, int], PhasePolynomial]]:
    """Symbolic I3, J3 and the k-coefficient table exactly as printed for a case."""
    from ..core import get_case

    case = get_case(case_id)
    cs = constant_set(case.ratios)
    (x, y), (px, py), w, (k1, k2) = cs.xs, cs.ps, cs.w0, cs.ks
    inv = lambda f: f**-1  # noqa: E731
    if case_id == "iso_1_1":
        i3 = x * py - y * px
        table = {
            (1, 0): (y * inv(x)) ** 2,
            (0, 1): (x * inv(y)) ** 2,
        }
    elif case_id == "aniso_2_1":
        i3 = (x * py - y * px) * py - w * w * x * y * y
        table = {
            (1, 0): y**2 * x**-2 * py * py,
            (0, 1): Fraction(1, 2) * y**-2 * (y * px - 2 * x * py) ** 2,
            (1, 1): Fraction(1, 2) * x**-2,
            (0, 2): x**2 * y**-4,
        }
    elif case_id == "aniso_3_1":
        i3 = 3 * (x * py - y * px) * py * py + w * w * (y * px - 9 * x * py) * y * y
        table = {
            (1, 0): y**2 * x**-2 * (3 * py * py - w * w * y * y) ** 2,
            (0, 1): 3 * y**-2 * (2 * y * px * py - 3 * x * py * py + 3 * w * w * x * y * y) ** 2,
            (1, 1): 12 * py * py * x**-2,
            (0, 2): 3 * y**-4 * (3 * x * py - y * px) ** 2,
            (1, 2): 3 * x**-2 * y**-2,
            (0, 3): 9 * x**2 * y**-6,
        }
    else:  # pragma: no cover - registry and this table are kept in sync
        raise KeyError(case_id)
    j3 = i3 * i3
    for (a, b), coeff in table.items():
        j3 = j3 + k1**a * k2**b * coeff
    return i3, j3, table


def leading_energy_term(cs: ConstantSet) -> PhasePolynomial:
    """2^(n_x+n_y) E_x^{n_y} E_y^{n_x}."""
    nx, ny = cs.ratios
    return 2 ** (nx + ny) * cs.energy(0) ** ny * cs.energy(1) ** nx


def general_J3(ratios: Sequence[int], degree_limit: int = DEFAULT_DEGREE_LIMIT) -> J3Expansion:
    """λ and J3 for arbitrary two-dimensional ratios.

    ``λ w0² J3 = Re(M_xy) − 2^(n_x+n_y) E_x^{n_y} E_y^{n_x}``, with λ fixed so the
    strength-free part of J3 is exactly ``I3²``.  I3 is ``Im(K_xy)/w0`` divided by
    its positive coefficient content, which reproduces the normalizers 1, 1/2, 1
    of the 1:1, 2:1 and 3:1 cases.
    """
    ratios = tuple(ratios)
    if len(ratios) != 2:
        raise ValueError("J3 is defined for two degrees of freedom")
    cs = constant_set(ratios, degree_limit)
    w = cs.w0
    diff = cs.M_pair(0, 1).re - leading_energy_term(cs)
    base = cs.K_pair(0, 1).im.divide_monomial("w0", 1)
    content = base.content()
    if content == 0:
        raise NormalizationError("Im(K_xy) vanishes identically")
    i3 = base / content
    target = w * w * i3 * i3
    limit = diff.without_strengths()
    probe_exps, probe_coeff = next(iter(target.terms.items()))
    lam = Fraction(limit.terms.get(probe_exps, 0)) / Fraction(probe_coeff)
    if lam == 0 or limit != lam * target:
        raise NormalizationError(
            f"k -> 0 limit of Re(M_xy) - 2^(nx+ny) Ex^ny Ey^nx is not a multiple of w0^2 I3^2 "
            f"for ratios {ratios}"
        )
    try:
        j3 = diff.divide_monomial("w0", 2) / lam
    except ArithmeticError as exc:
        raise NormalizationError(f"Re(M_xy) correction not divisible by w0^2: {exc}") from None
    return J3Expansion(lam, j3, i3, 1 / content)


def match_paper_case(case_id: str) -> Report:
    """Expand Re(M_xy) and compare with the printed J3 of a registered case."""
    from ..core import get_case

    case = get_case(case_id)
    cs = constant_set(case.ratios)
    w = cs.w0
    i3, j3, table = printed_case(case_id)
    report = Report(f"printed case {case_id}")

    lam = case.lam
    report.add(
        CheckResult.of(
            f"Re(M_xy) = {2 ** sum(case.ratios)} Ex^{case.ratios[1]} Ey^{case.ratios[0]} "
            f"+ ({lam}) w0^2 J3",
            cs.M_pair(0, 1).re - (leading_energy_term(cs) + lam * w * w * j3),
        )
    )
    report.add(
        CheckResult.of(
            f"I3 = ({case.i3_normalizer})/w0 Im(K_xy)",
            cs.K_pair(0, 1).im - (w * i3) / case.i3_normalizer,
        )
    )
    report.add(CheckResult.of("J3|k=0 = I3^2", j3.without_strengths() - i3 * i3))
    for (a, b), coeff in sorted(table.items()):
        # each printed component must match the corresponding coefficient in J3
        got = j3.coefficient_of(k1=a, k2=b)
        report.add(CheckResult.of(f"J3^({a}{b}) component", got - coeff))

    try:
        gen = general_J3(case.ratios)
    except NormalizationError as exc:
        report.add(CheckResult(f"general_J3 normalization", False, None, str(exc)))
        return report
    lam_ok = gen.lam == lam
    report.add(
        CheckResult(
            f"general_J3 lambda = {lam}",
            lam_ok,
            None,
            "" if lam_ok else f"general_J3 gave {gen.lam}",
        )
    )
    report.add(CheckResult.of("general_J3 J3 = printed J3", gen.J3 - j3))
    norm_ok = gen.i3_normalizer == case.i3_normalizer
    report.add(
        CheckResult(
            "general_J3 I3 normalizer",
            norm_ok,
            None,
            "" if norm_ok else f"general_J3 gave {gen.i3_normalizer}",
        )
    )
    return report
