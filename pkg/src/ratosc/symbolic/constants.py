"""Exact expansions of the energies, Hamiltonians and complex constants."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

from ..errors import DegreeLimitError
from .poly import ComplexPoly, PhasePolynomial, generators

DEFAULT_DEGREE_LIMIT = 40

HALF = Fraction(1, 2)


def _validate_ratios(ratios: Sequence[int]) -> tuple[int, ...]:
    ratios = tuple(ratios)
    if not ratios:
        raise ValueError("at least one ratio is required")
    for n in ratios:
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValueError(f"ratios must be positive integers, got {n!r}")
    return ratios


def power_product(zi: ComplexPoly, zj: ComplexPoly, ni: int, nj: int) -> ComplexPoly:
    """``zi^{nj} * conj(zj)^{ni}``, the pattern shared by K_ij, T~_ij and M_ij."""
    return (zi**nj) * (zj.conjugate() ** ni)


@dataclass(frozen=True, eq=False)
class ConstantSet:
    """All symbolic observables for a given ratio vector, built on demand.

    Indices are zero-based.  ``w0`` and the strengths ``k_i`` stay symbolic.
    """

    ratios: tuple[int, ...]
    degree_limit: int = DEFAULT_DEGREE_LIMIT

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratios", _validate_ratios(self.ratios))
        n = self.ratios
        worst = max(2 * (a + b) for a in n for b in n)
        if worst > self.degree_limit:
            raise DegreeLimitError(
                f"ratios {n} need momentum degree {worst} > limit {self.degree_limit}"
            )

    @property
    def dof(self) -> int:
        return len(self.ratios)

    @cached_property
    def _gens(self):
        return generators(self.dof)

    @property
    def xs(self) -> list[PhasePolynomial]:
        return self._gens[0]

    @property
    def ps(self) -> list[PhasePolynomial]:
        return self._gens[1]

    @property
    def w0(self) -> PhasePolynomial:
        return self._gens[2]

    @property
    def ks(self) -> list[PhasePolynomial]:
        return self._gens[3]

    def centrifugal(self, i: int) -> PhasePolynomial:
        """k_i * x_i**-2."""
        return self.ks[i] * self.xs[i] ** -2

    # -- real observables --------------------------------------------------
    @lru_cache(maxsize=None)
    def energy(self, i: int, deformed: bool = True) -> PhasePolynomial:
        x, p, w, n = self.xs[i], self.ps[i], self.w0, self.ratios[i]
        e = HALF * p * p + HALF * n * n * w * w * x * x
        if deformed:
            e = e + HALF * self.centrifugal(i)
        return e

    @cached_property
    def H1(self) -> PhasePolynomial:
        """Isotropic oscillator: every ratio replaced by one, no strengths."""
        w = self.w0
        return sum(
            (HALF * p * p + HALF * w * w * x * x for x, p in zip(self.xs, self.ps)),
            PhasePolynomial.zero(self.dof),
        )

    @cached_property
    def H2(self) -> PhasePolynomial:
        return sum((self.energy(i, False) for i in range(self.dof)), PhasePolynomial.zero(self.dof))

    @cached_property
    def H3(self) -> PhasePolynomial:
        return sum((self.energy(i) for i in range(self.dof)), PhasePolynomial.zero(self.dof))

    # -- complex factors ---------------------------------------------------
    @lru_cache(maxsize=None)
    def K(self, i: int) -> ComplexPoly:
        """K_i = p_i + i n_i w0 x_i."""
        return ComplexPoly(self.ps[i], self.ratios[i] * self.w0 * self.xs[i])

    @lru_cache(maxsize=None)
    def K_iso(self, i: int) -> ComplexPoly:
        """p_i + i w0 x_i, the factor used for the isotropic tensor T_ij."""
        return ComplexPoly(self.ps[i], self.w0 * self.xs[i])

    @lru_cache(maxsize=None)
    def K2(self, i: int) -> ComplexPoly:
        x, p, w, n = self.xs[i], self.ps[i], self.w0, self.ratios[i]
        return ComplexPoly(p * p - n * n * w * w * x * x, 2 * n * w * x * p)

    @lru_cache(maxsize=None)
    def M(self, i: int) -> ComplexPoly:
        return ComplexPoly(self.K2(i).re + self.centrifugal(i), self.K2(i).im)

    # -- two-index constants -----------------------------------------------
    @lru_cache(maxsize=None)
    def K_pair(self, i: int, j: int) -> ComplexPoly:
        """K_ij = K_i^{n_j} (K_j*)^{n_i} (identical to the tensor T~_ij)."""
        return power_product(self.K(i), self.K(j), self.ratios[i], self.ratios[j])

    def T_tilde(self, i: int, j: int) -> ComplexPoly:
        return self.K_pair(i, j)

    @lru_cache(maxsize=None)
    def T(self, i: int, j: int) -> ComplexPoly:
        return self.K_iso(i) * self.K_iso(j).conjugate()

    @lru_cache(maxsize=None)
    def K2_pair(self, i: int, j: int) -> ComplexPoly:
        return power_product(self.K2(i), self.K2(j), self.ratios[i], self.ratios[j])

    @lru_cache(maxsize=None)
    def M_pair(self, i: int, j: int) -> ComplexPoly:
        return power_product(self.M(i), self.M(j), self.ratios[i], self.ratios[j])

    def all_named(self) -> dict[str, ComplexPoly]:
        """Every complex constant keyed by its one-based label."""
        out: dict[str, ComplexPoly] = {}
        idx = range(self.dof)
        for i in idx:
            out[f"K_{i + 1}"] = self.K(i)
            out[f"K2_{i + 1}"] = self.K2(i)
            out[f"M_{i + 1}"] = self.M(i)
        for i in idx:
            for j in idx:
                tag = f"{i + 1}{j + 1}"
                out[f"K_{tag}"] = self.K_pair(i, j)
                out[f"K2_{tag}"] = self.K2_pair(i, j)
                out[f"T_{tag}"] = self.T(i, j)
                out[f"Ttilde_{tag}"] = self.T_tilde(i, j)
                out[f"M_{tag}"] = self.M_pair(i, j)
        return out


@lru_cache(maxsize=64)
def constant_set(ratios: tuple[int, ...], degree_limit: int = DEFAULT_DEGREE_LIMIT) -> ConstantSet:
    """Shared, cached :class:`ConstantSet` for a ratio tuple."""
    return ConstantSet(tuple(ratios), degree_limit)


def build_constants(
    ratios: Sequence[int], degree_limit: int = DEFAULT_DEGREE_LIMIT
) -> dict[str, ComplexPoly]:
    """Fully expanded K_i, K2_i, M_i, K_ij, K2_ij, T_ij, T~_ij and M_ij."""
    return ConstantSet(tuple(ratios), degree_limit).all_named()
