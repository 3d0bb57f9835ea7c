"""Numeric brackets, the Re/Im(M_xy)–E_x bracket relations and functional-independence rank.

Gradients come from two independent routes: exact symbolic derivatives
evaluated in floating point, and central finite differences of the direct
numeric formulas in :mod:`ratosc.core`.  Every gradient call compares them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from . import core
from .core import PhaseState, SystemParams
from .errors import CrossCheckError
from .symbolic import constants as symconst
from .symbolic.checks import general_J3, printed_case
from .symbolic.poly import PhasePolynomial, differentiate, generator_values

__all__ = [
    "ObservableRef",
    "RankReport",
    "Prop2Residuals",
    "KINDS",
    "energy",
    "re_M",
    "im_M",
    "observable_value",
    "observable_polynomial",
    "gradient",
    "fd_gradient",
    "poisson_bracket_num",
    "prop2_check",
    "sample_points",
    "independence_rank",
    "canonical_set",
    "fradkin_set",
]

PAIR_KINDS = ("re_Mij", "im_Mij", "re_Kij", "im_Kij")
SINGLE_KINDS = ("energy_i", "position_i", "momentum_i")
GLOBAL_KINDS = ("hamiltonian", "paper_J3")
KINDS = PAIR_KINDS + SINGLE_KINDS + GLOBAL_KINDS

GRADIENT_RTOL = 1e-5
FD_STEP = 1e-6
RANK_THRESHOLD = 1e-8
STATIONARY_FLOOR = 1e-6


@dataclass(frozen=True)
class ObservableRef:
    """Names one real observable; indices are zero-based.

    ``position_i``/``momentum_i`` are coordinate probes, not constants.
    """

    kind: str
    indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown observable kind {self.kind!r}")
        want = 2 if self.kind in PAIR_KINDS else 1 if self.kind in SINGLE_KINDS else 0
        if len(self.indices) != want:
            raise ValueError(f"{self.kind} takes {want} indices, got {self.indices}")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def check(self, dof: int) -> None:
        for i in self.indices:
            if not 0 <= i < dof:
                raise IndexError(f"{self} index out of range for {dof} degrees of freedom")

    @property
    def label(self) -> str:
        tag = "".join(str(i + 1) for i in self.indices)
        short = {
            "energy_i": "E",
            "position_i": "x",
            "momentum_i": "p",
            "re_Mij": "reM",
            "im_Mij": "imM",
            "re_Kij": "reK",
            "im_Kij": "imK",
            "hamiltonian": "H",
            "paper_J3": "J3",
        }[self.kind]
        return short + tag


def energy(i: int) -> ObservableRef:
    return ObservableRef("energy_i", (i,))


def re_M(i: int, j: int) -> ObservableRef:
    return ObservableRef("re_Mij", (i, j))


def im_M(i: int, j: int) -> ObservableRef:
    return ObservableRef("im_Mij", (i, j))


# ---------------------------------------------------------------------------
# Values and gradients


def _lambda_for(ratios: tuple[int, ...]) -> Fraction:
    case = core.case_for_ratios(ratios)
    return case.lam if case is not None else general_J3(ratios).lam


def observable_value(ref: ObservableRef, params: SystemParams, state: PhaseState) -> float:
    """Direct numeric value via :mod:`ratosc.core` (no symbolic algebra involved)."""
    ref.check(params.dof)
    k = ref.kind
    if k == "energy_i":
        return core.energy_i(params, state, ref.indices[0])
    if k == "position_i":
        return state.positions[ref.indices[0]]
    if k == "momentum_i":
        return state.momenta[ref.indices[0]]
    if k == "hamiltonian":
        return core.hamiltonian(params, state)
    if k in ("re_Mij", "im_Mij"):
        z = core.deformed_constant(params, state, *ref.indices)
        return z.re if k == "re_Mij" else z.im
    if k in ("re_Kij", "im_Kij"):
        z = core.linear_constant(params, state, *ref.indices)
        return z.re if k == "re_Kij" else z.im
    # paper_J3
    case = core.case_for_ratios(params.ratios)
    if case is not None:
        return core.paper_invariant_J3(case, params, state)
    if params.dof != 2:
        raise ValueError("J3 is defined for two degrees of freedom")
    nx, ny = params.ratios
    lam = float(_lambda_for(params.ratios))
    re = core.deformed_constant(params, state, 0, 1).re
    lead = 2.0 ** (nx + ny) * core.energy_i(params, state, 0) ** ny * core.energy_i(params, state, 1) ** nx
    return (re - lead) / (lam * params.omega0**2)


@lru_cache(maxsize=512)
def observable_polynomial(ref: ObservableRef, ratios: tuple[int, ...]) -> PhasePolynomial:
    """Exact symbolic form of an observable (symbolic w0 and strengths)."""
    ref.check(len(ratios))
    cs = symconst.constant_set(ratios)
    k = ref.kind
    if k == "energy_i":
        return cs.energy(ref.indices[0])
    if k == "position_i":
        return cs.xs[ref.indices[0]]
    if k == "momentum_i":
        return cs.ps[ref.indices[0]]
    if k == "hamiltonian":
        return cs.H3
    if k in ("re_Mij", "im_Mij"):
        z = cs.M_pair(*ref.indices)
        return z.re if k == "re_Mij" else z.im
    if k in ("re_Kij", "im_Kij"):
        z = cs.K_pair(*ref.indices)
        return z.re if k == "re_Kij" else z.im
    case = core.case_for_ratios(ratios)
    if case is not None:
        return printed_case(case.case_id)[1]
    return general_J3(ratios).J3


@lru_cache(maxsize=512)
def _compiled_gradient(ref: ObservableRef, ratios: tuple[int, ...]):
    poly = observable_polynomial(ref, ratios)
    n = len(ratios)
    return [differentiate(poly, g).compile() for g in range(2 * n)]


def symbolic_gradient(ref: ObservableRef, params: SystemParams, state: PhaseState) -> np.ndarray:
    values = generator_values(params, state)
    return np.array([d(values) for d in _compiled_gradient(ref, params.ratios)])


def fd_gradient(
    ref: ObservableRef, params: SystemParams, state: PhaseState, step: float = FD_STEP
) -> np.ndarray:
    """Central differences with step ``step * max(1, |coordinate|)``."""
    z = np.array(state.as_vector(), dtype=float)
    out = np.empty_like(z)
    for m in range(len(z)):
        h = step * max(1.0, abs(z[m]))
        zp, zm = z.copy(), z.copy()
        zp[m] += h
        zm[m] -= h
        fp = observable_value(ref, params, PhaseState.from_vector(zp))
        fm = observable_value(ref, params, PhaseState.from_vector(zm))
        out[m] = (fp - fm) / ((zp[m] - zm[m]))
    return out


def gradient(
    ref: ObservableRef,
    params: SystemParams,
    state: PhaseState,
    check: bool = True,
    rtol: float = GRADIENT_RTOL,
) -> np.ndarray:
    """Gradient ``(∂/∂x_1..∂/∂x_n, ∂/∂p_1..∂/∂p_n)`` from the symbolic route.

    With ``check`` the finite-difference route must agree component-wise within
    ``rtol`` times the gradient's largest component (floored at 1e-3).
    """
    ref.check(params.dof)
    g = symbolic_gradient(ref, params, state)
    if check:
        fd = fd_gradient(ref, params, state)
        scale = max(float(np.max(np.abs(g))), 1e-3)
        err = float(np.max(np.abs(g - fd)))
        if not err <= rtol * scale:
            raise CrossCheckError(
                f"gradient of {ref.label} disagrees between symbolic and finite-difference "
                f"routes: max error {err:.3e} vs scale {scale:.3e} at {state}"
            )
    return g


def _bracket(ga: np.ndarray, gb: np.ndarray) -> float:
    n = len(ga) // 2
    return math.fsum(ga[:n] * gb[n:]) - math.fsum(ga[n:] * gb[:n])


def poisson_bracket_num(
    a: ObservableRef, b: ObservableRef, params: SystemParams, state: PhaseState, check: bool = True
) -> float:
    """Σ_i ∂a/∂x_i ∂b/∂p_i − ∂a/∂p_i ∂b/∂x_i from the two gradients."""
    return _bracket(gradient(a, params, state, check), gradient(b, params, state, check))


def bracket_scale(a: ObservableRef, b: ObservableRef, params: SystemParams, state: PhaseState) -> float:
    """Natural magnitude of {a, b}: the product of the gradient norms."""
    ga = symbolic_gradient(a, params, state)
    gb = symbolic_gradient(b, params, state)
    return float(np.linalg.norm(ga) * np.linalg.norm(gb))


# ---------------------------------------------------------------------------
# Re/Im(M_xy) brackets with E_x


class Prop2Residuals(NamedTuple):
    """Relative residuals of the three bracket relations with E_x."""

    im_bracket: float  # {Im M_xy, E_x} − 2 w0 nx ny Re M_xy
    re_bracket: float  # {Re M_xy, E_x} + 2 w0 nx ny Im M_xy
    j3_bracket: float  # {J3, E_x} + 2 nx ny / (λ w0) Im M_xy
    lam: Fraction

    def worst(self) -> float:
        return max(abs(self.im_bracket), abs(self.re_bracket), abs(self.j3_bracket))


def _relative(lhs: float, rhs: float, scale: float) -> float:
    return (lhs - rhs) / max(scale, abs(rhs), abs(lhs), 1e-300)


def prop2_check(params: SystemParams, state: PhaseState, lam: Fraction | None = None) -> Prop2Residuals:
    """Residuals of the Re/Im(M_xy) and J3 brackets with E_x, relative to their magnitudes.

    λ comes from the case registry when the ratios match a registered case and
    from :func:`ratosc.symbolic.general_J3` otherwise; it is never fitted.
    """
    if params.dof != 2:
        raise ValueError("the bracket relations are stated for two degrees of freedom")
    if lam is None:
        lam = _lambda_for(params.ratios)
    nx, ny = params.ratios
    w = params.omega0
    ex, re_, im_, j3 = energy(0), re_M(0, 1), im_M(0, 1), ObservableRef("paper_J3")
    m = core.deformed_constant(params, state, 0, 1)
    gex = gradient(ex, params, state)
    g_re, g_im, g_j3 = (gradient(r, params, state) for r in (re_, im_, j3))
    nex = np.linalg.norm(gex)

    r1 = _relative(_bracket(g_im, gex), 2 * w * nx * ny * m.re, np.linalg.norm(g_im) * nex)
    r2 = _relative(_bracket(g_re, gex), -2 * w * nx * ny * m.im, np.linalg.norm(g_re) * nex)
    r3 = _relative(
        _bracket(g_j3, gex), -2 * nx * ny / (float(lam) * w) * m.im, np.linalg.norm(g_j3) * nex
    )
    return Prop2Residuals(r1, r2, r3, lam)


# ---------------------------------------------------------------------------
# Functional independence


def canonical_set(dof: int) -> list[ObservableRef]:
    """M_11..M_nn and Im M_12, Im M_23, ..., Im M_{n-1,n}: 2n − 1 functions."""
    refs = [re_M(i, i) for i in range(dof)]
    refs += [im_M(i, i + 1) for i in range(dof - 1)]
    return refs


def fradkin_set(dof: int) -> list[ObservableRef]:
    """F_ii and F_{j,j+1}, realised as Re K_ij (equal to F_ij when ratios are 1 and k = 0)."""
    refs = [ObservableRef("re_Kij", (i, i)) for i in range(dof)]
    refs += [ObservableRef("re_Kij", (i, i + 1)) for i in range(dof - 1)]
    return refs


def sample_points(
    params: SystemParams,
    count: int,
    seed: int = 0,
    x_range: tuple[float, float] = (0.5, 2.0),
    p_range: tuple[float, float] = (-1.0, 1.0),
    stationary_floor: float = STATIONARY_FLOOR,
) -> list[PhaseState]:
    """Seeded regular points, resampling where the Hamiltonian gradient is tiny."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    n = params.dof
    w2 = np.array([(params.omega0 * m) ** 2 for m in params.ratios])
    k = np.array(params.strengths)
    points = []
    while len(points) < count:
        x = rng.uniform(*x_range, size=n)
        p = rng.uniform(*p_range, size=n)
        grad_h = np.concatenate((w2 * x - k / x**3, p))
        if np.linalg.norm(grad_h) < stationary_floor:
            continue
        points.append(PhaseState(tuple(x), tuple(p)))
    return points


@dataclass
class RankReport:
    samples: int
    rows: int
    threshold: float
    labels: list[str]
    points: list[PhaseState] = field(repr=False)
    spectra: list[list[float]] = field(repr=False)
    ranks: list[int]
    expected: int | None = None

    @property
    def min_rank(self) -> int:
        return min(self.ranks)

    @property
    def max_rank(self) -> int:
        return max(self.ranks)

    def degenerate(self) -> list[int]:
        """Indices of points whose rank is below ``expected``."""
        if self.expected is None:
            return []
        return [m for m, r in enumerate(self.ranks) if r < self.expected]

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "rows": self.rows,
            "threshold": self.threshold,
            "observables": self.labels,
            "expected_rank": self.expected,
            "ranks": self.ranks,
            "min_rank": self.min_rank,
            "max_rank": self.max_rank,
            "spectra": self.spectra,
            "degenerate_points": [
                {"index": m, "positions": list(self.points[m].positions), "momenta": list(self.points[m].momenta)}
                for m in self.degenerate()
            ],
        }


def numerical_rank(rows: np.ndarray, threshold: float = RANK_THRESHOLD) -> tuple[int, np.ndarray]:
    """Rank of a gradient stack after scaling each nonzero row to unit length.

    Row scaling leaves the rank unchanged and removes the huge magnitude spread
    between, e.g., |M_1|^(2 n_1) and Im M_{n-1,n}.
    """
    norms = np.linalg.norm(rows, axis=1)
    scaled = rows[norms > 0] / norms[norms > 0, None]
    if scaled.size == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(scaled, compute_uv=False)
    return int(np.sum(s > threshold * s[0])), s


def independence_rank(
    params: SystemParams,
    observables: Sequence[ObservableRef],
    points: int | Sequence[PhaseState] = 100,
    seed: int = 0,
    threshold: float = RANK_THRESHOLD,
    expected: int | None = None,
    check: bool = True,
) -> RankReport:
    """Per-point numerical rank of the gradients of ``observables``."""
    if not observables:
        raise ValueError("at least one observable is required")
    for ref in observables:
        ref.check(params.dof)
    if isinstance(points, int):
        points = sample_points(params, points, seed)
    points = list(points)
    ranks, spectra = [], []
    for state in points:
        rows = np.array([gradient(ref, params, state, check) for ref in observables])
        r, s = numerical_rank(rows, threshold)
        ranks.append(r)
        spectra.append([float(v) for v in s])
    report = RankReport(
        samples=len(points),
        rows=len(observables),
        threshold=threshold,
        labels=[ref.label for ref in observables],
        points=points,
        spectra=spectra,
        ranks=ranks,
        expected=expected,
    )
    for m in report.degenerate():
        warnings.warn(
            f"rank {ranks[m]} < {expected} at point {m}: {points[m]}", RuntimeWarning, stacklevel=2
        )
    return report
