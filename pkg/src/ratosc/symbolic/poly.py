"""Sparse Laurent polynomials over phase space with exact rational coefficients.

A polynomial for ``n`` degrees of freedom lives on the ``3n + 1`` generators

    x_1 .. x_n, p_1 .. p_n, w0, k_1 .. k_n

(positions, momenta, base frequency, centrifugal strengths).  Positions may
carry negative exponents; every other generator is polynomial.  Terms are kept
in a dict from exponent tuples to ``int``/``Fraction`` coefficients with no
zero entries, so structural equality is mathematical equality.

Complex quantities are :class:`ComplexPoly` pairs ``(re, im)``, which gives
Gaussian-rational coefficients with ``i`` handled explicitly.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Union

import numpy as np

from ..errors import SingularStateError

__all__ = [
    "PhasePolynomial",
    "ComplexPoly",
    "Coefficient",
    "generator_names",
    "generator_index",
    "generators",
    "differentiate",
    "poisson_bracket_sym",
    "momentum_degree",
]

Coefficient = Union[int, Fraction]
Exponents = tuple[int, ...]


def _normalize_coeff(c) -> Coefficient:
    if isinstance(c, bool):
        c = int(c)
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _normalize_coeff(Fraction(c.numerator, c.denominator))
    raise TypeError(f"exact coefficients only (int or Fraction), got {type(c).__name__}")


def generator_names(dof: int) -> list[str]:
    return (
        [f"x{i + 1}" for i in range(dof)]
        + [f"p{i + 1}" for i in range(dof)]
        + ["w0"]
        + [f"k{i + 1}" for i in range(dof)]
    )


_GEN_RE = re.compile(r"^(x|p|k)(\d+)$|^w0$")


def generator_index(dof: int, name: str) -> int:
    """Position of generator ``name`` (``"x1"``, ``"p2"``, ``"w0"``, ``"k1"``)."""
    m = _GEN_RE.match(name)
    if m is None:
        raise KeyError(f"unknown generator {name!r}")
    if name == "w0":
        return 2 * dof
    kind, idx = m.group(1), int(m.group(2)) - 1
    if not 0 <= idx < dof:
        raise KeyError(f"generator {name!r} out of range for {dof} degrees of freedom")
    return {"x": 0, "p": dof, "k": 2 * dof + 1}[kind] + idx


class PhasePolynomial:
    """Immutable sparse Laurent polynomial; see module docstring for generators."""

    __slots__ = ("dof", "terms", "_hash")

    def __init__(self, dof: int, terms: Mapping[Exponents, Coefficient] | None = None):
        if dof < 1:
            raise ValueError("dof must be >= 1")
        self.dof = dof
        width = 3 * dof + 1
        clean: dict[Exponents, Coefficient] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != width:
                raise ValueError(f"exponent vector of length {len(exps)}, expected {width}")
            if any(e < 0 for e in exps[dof:]):
                raise ValueError("only positions may carry negative exponents")
            c = _normalize_coeff(c)
            if c != 0:
                clean[exps] = clean.get(exps, 0) + c
                if clean[exps] == 0:
                    del clean[exps]
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, dof: int, terms: dict[Exponents, Coefficient]) -> "PhasePolynomial":
        # trusted constructor: terms already canonical
        obj = object.__new__(cls)
        obj.dof = dof
        obj.terms = terms
        obj._hash = None
        return obj

    # -- constructors ------------------------------------------------------
    @property
    def width(self) -> int:
        return 3 * self.dof + 1

    @classmethod
    def constant(cls, dof: int, c: Coefficient = 1) -> "PhasePolynomial":
        c = _normalize_coeff(c)
        return cls._raw(dof, {(0,) * (3 * dof + 1): c} if c != 0 else {})

    @classmethod
    def zero(cls, dof: int) -> "PhasePolynomial":
        return cls._raw(dof, {})

    @classmethod
    def generator(cls, dof: int, name: str, power: int = 1) -> "PhasePolynomial":
        exps = [0] * (3 * dof + 1)
        exps[generator_index(dof, name)] = power
        return cls(dof, {tuple(exps): 1})

    # -- inspection --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, PhasePolynomial):
            return self.dof == other.dof and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == PhasePolynomial.constant(self.dof, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dof, frozenset(self.terms.items())))
        return self._hash

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def content(self) -> Fraction:
        """Positive gcd of the coefficients (numerator gcd over denominator lcm)."""
        if not self.terms:
            return Fraction(0)
        num, den = 0, 1
        for c in self.terms.values():
            c = Fraction(c)
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def degree_in(self, names: Iterable[str]) -> int:
        """Maximum total degree in the named generators (0 for the zero polynomial)."""
        idx = [generator_index(self.dof, n) for n in names]
        return max((sum(e[i] for i in idx) for e in self.terms), default=0)

    def _check(self, other: "PhasePolynomial") -> None:
        if other.dof != self.dof:
            raise ValueError(f"incompatible generator sets: dof {self.dof} vs {other.dof}")

    def _coerce(self, other) -> "PhasePolynomial":
        if isinstance(other, PhasePolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return PhasePolynomial.constant(self.dof, other)
        return NotImplemented

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v == 0:
                out.pop(e, None)
            else:
                out[e] = v
        return PhasePolynomial._raw(self.dof, out)

    __radd__ = __add__

    def __neg__(self):
        return PhasePolynomial._raw(self.dof, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _normalize_coeff(other)
            if other == 0:
                return PhasePolynomial.zero(self.dof)
            return PhasePolynomial._raw(self.dof, {e: _normalize_coeff(c * other) for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponents, Coefficient] = {}
        get = out.get
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple([a + b for a, b in zip(e1, e2)])
                out[e] = get(e, 0) + c1 * c2
        return PhasePolynomial._raw(
            self.dof, {e: _normalize_coeff(c) for e, c in out.items() if c != 0}
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of a polynomial by zero")
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or isinstance(k, bool):
            raise TypeError("integer powers only")
        if k < 0:
            if not self.is_monomial():
                raise ValueError("negative powers are only defined for monomials")
            ((e, c),) = self.terms.items()
            if any(v != 0 for v in e[self.dof:]):
                raise ValueError("negative powers are only defined for position monomials")
            inv = PhasePolynomial(self.dof, {tuple(-v for v in e): Fraction(1) / Fraction(c)})
            return inv ** (-k)
        result = PhasePolynomial.constant(self.dof, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- structural helpers ------------------------------------------------
    def divide_monomial(self, name: str, power: int = 1) -> "PhasePolynomial":
        """Exact division by ``name**power``; raises if some term is not divisible."""
        idx = generator_index(self.dof, name)
        out = {}
        for e, c in self.terms.items():
            new = list(e)
            new[idx] -= power
            if idx >= self.dof and new[idx] < 0:
                raise ArithmeticError(f"{self} is not divisible by {name}^{power}")
            out[tuple(new)] = c
        return PhasePolynomial._raw(self.dof, out)

    def set_zero(self, names: Iterable[str]) -> "PhasePolynomial":
        """Substitute 0 for each named non-position generator (drop the terms containing it)."""
        idx = [generator_index(self.dof, n) for n in names]
        if any(i < self.dof for i in idx):
            raise ValueError("cannot set a Laurent position generator to zero")
        return PhasePolynomial._raw(
            self.dof, {e: c for e, c in self.terms.items() if all(e[i] == 0 for i in idx)}
        )

    def without_strengths(self) -> "PhasePolynomial":
        return self.set_zero(f"k{i + 1}" for i in range(self.dof))

    def coefficient_of(self, **powers: int) -> "PhasePolynomial":
        """Collect the polynomial multiplying the given generator powers exactly.

        ``coefficient_of(k1=1, k2=0)`` returns the part linear in ``k1`` and free of
        ``k2``, with those generators removed.
        """
        idx = {generator_index(self.dof, n): p for n, p in powers.items()}
        out = {}
        for e, c in self.terms.items():
            if all(e[i] == p for i, p in idx.items()):
                new = list(e)
                for i in idx:
                    new[i] = 0
                out[tuple(new)] = c
        return PhasePolynomial._raw(self.dof, out)

    # -- evaluation --------------------------------------------------------
    def compile(self) -> "CompiledPolynomial":
        return CompiledPolynomial(self)

    def evaluate(self, values) -> float:
        """Evaluate at a full generator vector (see :func:`generator_values`)."""
        return self.compile()(values)

    # -- printing ----------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Exponents, Coefficient]]:
        """Terms in graded lexicographic order (highest total degree first)."""
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-v for v in t[0])))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = generator_names(self.dof)
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for name, v in zip(names, e):
                if v == 1:
                    factors.append(name)
                elif v != 0:
                    factors.append(f"{name}^{v}")
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if factors:
                body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
            else:
                body = str(mag)
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"PhasePolynomial(dof={self.dof}, {self})"


class CompiledPolynomial:
    """Vectorised floating-point evaluator for a fixed polynomial."""

    def __init__(self, poly: PhasePolynomial):
        self.dof = poly.dof
        items = list(poly.terms.items())
        width = poly.width
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), width)
        self.coeffs = np.array([float(c) for _, c in items], dtype=float)

    def __call__(self, values) -> float:
        v = np.asarray(values, dtype=float)
        if v.shape != (3 * self.dof + 1,):
            raise ValueError(f"expected {3 * self.dof + 1} generator values, got shape {v.shape}")
        if not len(self.coeffs):
            return 0.0
        zero = v == 0.0
        # terms containing a positive power of a vanishing generator are exactly zero
        dead = (self.exps > 0)[:, zero].any(axis=1)
        live = ~dead
        if (self.exps[live][:, zero] < 0).any():
            raise SingularStateError("negative power of a vanishing position")
        with np.errstate(over="ignore"):
            mono = np.prod(np.power(v, self.exps[live]), axis=1)
        return math.fsum(self.coeffs[live] * mono)

    def magnitude(self, values) -> float:
        """Sum of absolute term values: the scale of the rounding error in ``__call__``."""
        v = np.abs(np.asarray(values, dtype=float))
        if not len(self.coeffs):
            return 0.0
        dead = (self.exps > 0)[:, v == 0.0].any(axis=1)
        with np.errstate(over="ignore", divide="ignore"):
            mono = np.prod(np.power(v, self.exps[~dead]), axis=1)
        return math.fsum(np.abs(self.coeffs[~dead]) * mono)


def generators(dof: int) -> tuple[list[PhasePolynomial], list[PhasePolynomial], PhasePolynomial, list[PhasePolynomial]]:
    """Return ``(xs, ps, w0, ks)`` as degree-one polynomials."""
    xs = [PhasePolynomial.generator(dof, f"x{i + 1}") for i in range(dof)]
    ps = [PhasePolynomial.generator(dof, f"p{i + 1}") for i in range(dof)]
    w = PhasePolynomial.generator(dof, "w0")
    ks = [PhasePolynomial.generator(dof, f"k{i + 1}") for i in range(dof)]
    return xs, ps, w, ks


def generator_values(params, state) -> np.ndarray:
    """Generator vector ``(x, p, w0, k)`` for a numeric ``SystemParams``/``PhaseState``."""
    return np.array([*state.positions, *state.momenta, params.omega0, *params.strengths], dtype=float)


def _position(dof: int, generator: Union[str, int]) -> int:
    if isinstance(generator, str):
        idx = generator_index(dof, generator)
    else:
        idx = int(generator)
        if not 0 <= idx < 3 * dof + 1:
            raise KeyError(f"generator position {idx} out of range")
    if idx >= 2 * dof:
        raise ValueError(f"{generator_names(dof)[idx]} is a parameter, not a phase-space coordinate")
    return idx


def differentiate(a: PhasePolynomial, generator: Union[str, int]) -> PhasePolynomial:
    """Partial derivative with respect to a position or momentum generator."""
    idx = _position(a.dof, generator)
    out: dict[Exponents, Coefficient] = {}
    for e, c in a.terms.items():
        k = e[idx]
        if k == 0:
            continue
        new = list(e)
        new[idx] = k - 1
        out[tuple(new)] = c * k
    return PhasePolynomial._raw(a.dof, out)


class ComplexPoly:
    """A complex polynomial ``re + i*im`` with real-coefficient parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: PhasePolynomial, im: PhasePolynomial | None = None):
        if im is None:
            im = PhasePolynomial.zero(re.dof)
        if re.dof != im.dof:
            raise ValueError("real and imaginary parts have different generator sets")
        self.re = re
        self.im = im

    @property
    def dof(self) -> int:
        return self.re.dof

    def _coerce(self, other):
        if isinstance(other, ComplexPoly):
            return other
        if isinstance(other, PhasePolynomial):
            return ComplexPoly(other)
        if isinstance(other, (int, Fraction)):
            return ComplexPoly(PhasePolynomial.constant(self.dof, other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ComplexPoly(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexPoly(-self.re, -self.im)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ComplexPoly(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ComplexPoly(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def times_i(self) -> "ComplexPoly":
        return ComplexPoly(-self.im, self.re)

    def conjugate(self) -> "ComplexPoly":
        return ComplexPoly(self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("non-negative integer powers only")
        result = ComplexPoly(PhasePolynomial.constant(self.dof, 1))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def modulus2(self) -> PhasePolynomial:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.re == other.re and self.im == other.im

    __hash__ = None

    def __repr__(self) -> str:
        return f"ComplexPoly(re={self.re}, im={self.im})"


def poisson_bracket_sym(a, b):
    """Canonical bracket ``Σ ∂a/∂x_i ∂b/∂p_i − ∂a/∂p_i ∂b/∂x_i``.

    Accepts :class:`PhasePolynomial` or :class:`ComplexPoly` on either side; the
    complex case is extended bilinearly.
    """
    if isinstance(a, ComplexPoly) or isinstance(b, ComplexPoly):
        a = a if isinstance(a, ComplexPoly) else ComplexPoly(a)
        b = b if isinstance(b, ComplexPoly) else ComplexPoly(b)
        rr = poisson_bracket_sym(a.re, b.re)
        ii = poisson_bracket_sym(a.im, b.im)
        ri = poisson_bracket_sym(a.re, b.im)
        ir = poisson_bracket_sym(a.im, b.re)
        return ComplexPoly(rr - ii, ri + ir)
    if a.dof != b.dof:
        raise ValueError("incompatible generator sets")
    n = a.dof
    total = PhasePolynomial.zero(n)
    for i in range(n):
        dax, dap = differentiate(a, i), differentiate(a, n + i)
        if not dax and not dap:
            continue
        dbx, dbp = differentiate(b, i), differentiate(b, n + i)
        total = total + dax * dbp - dap * dbx
    return total


def momentum_degree(a: PhasePolynomial) -> int:
    """Maximum total degree in the momentum generators."""
    return a.degree_in(f"p{i + 1}" for i in range(a.dof))
