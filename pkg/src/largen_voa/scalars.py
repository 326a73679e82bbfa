"""Exact coefficients in the formal variables d^(1/2), hbar, N and lambda.

A :class:`GradedCoefficient` is a sparse polynomial with rational coefficients.
Each monomial is keyed by an exponent tuple ``(a, b, c, e)`` meaning

    d^(a/2) * hbar^b * N^c * lambda^e

``a`` may be negative (Laurent in d^(1/2)); the other exponents are >= 0.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

Exponent = Tuple[int, int, int, int]
Number = Union[int, Fraction]

_ZERO_EXP: Exponent = (0, 0, 0, 0)


class GradedCoefficient:
    """Immutable sparse polynomial over Q in d^(1/2), hbar, N, lambda."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, Number] | None = None):
        clean: Dict[Exponent, Fraction] = {}
        if terms:
            for exp, val in terms.items():
                if len(exp) != 4:
                    raise ValueError(f"exponent tuple must have 4 entries, got {exp!r}")
                if exp[1] < 0 or exp[2] < 0 or exp[3] < 0:
                    raise ValueError(f"negative hbar/N/lambda exponent in {exp!r}")
                val = Fraction(val)
                if val:
                    key = tuple(int(x) for x in exp)
                    clean[key] = clean.get(key, Fraction(0)) + val  # type: ignore[index]
            clean = {k: v for k, v in clean.items() if v}
        self._terms: Dict[Exponent, Fraction] = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, value: Number) -> "GradedCoefficient":
        return cls({_ZERO_EXP: value})

    @classmethod
    def monomial(cls, a: int = 0, b: int = 0, c: int = 0, e: int = 0, coeff: Number = 1) -> "GradedCoefficient":
        return cls({(a, b, c, e): coeff})

    @classmethod
    def _raw(cls, terms: Dict[Exponent, Fraction]) -> "GradedCoefficient":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # -- access -----------------------------------------------------------
    @property
    def terms(self) -> Dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Exponent, Fraction]]:
        return iter(sorted(self._terms.items()))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(exp == _ZERO_EXP for exp in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self._terms.get(_ZERO_EXP, Fraction(0))

    def coefficient(self, exp: Exponent) -> Fraction:
        return self._terms.get(exp, Fraction(0))

    def has_variable(self, index: int) -> bool:
        return any(exp[index] for exp in self._terms)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: object) -> "GradedCoefficient":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for exp, val in other._terms.items():
            s = out.get(exp, 0) + val
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        return GradedCoefficient._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "GradedCoefficient":
        return GradedCoefficient._raw({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: object) -> "GradedCoefficient":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: object) -> "GradedCoefficient":
        return (-self) + other

    def __mul__(self, other: object) -> "GradedCoefficient":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: Dict[Exponent, Fraction] = {}
        for e1, v1 in self._terms.items():
            for e2, v2 in other._terms.items():
                key = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3])
                s = out.get(key, 0) + v1 * v2
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return GradedCoefficient._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "GradedCoefficient":
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- rendering --------------------------------------------------------
    def __repr__(self) -> str:
        return f"GradedCoefficient({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for exp, val in sorted(self._terms.items()):
            mono = _monomial_text(exp)
            if not mono:
                body = _frac_text(abs(val))
            elif abs(val) == 1:
                body = mono
            else:
                body = f"{_frac_text(abs(val))}*{mono}"
            pieces.append(("-" if val < 0 else "+", body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def to_latex(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for exp, val in sorted(self._terms.items()):
            mono = _monomial_latex(exp)
            mag = abs(val)
            if mag.denominator != 1:
                num = rf"\frac{{{mag.numerator}}}{{{mag.denominator}}}"
            else:
                num = str(mag.numerator)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{num}{mono}"
            else:
                body = num
            pieces.append(("-" if val < 0 else "+", body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def to_json(self) -> list:
        return [
            {"a": e[0], "b": e[1], "c": e[2], "e": e[3], "num": v.numerator, "den": v.denominator}
            for e, v in sorted(self._terms.items())
        ]

    @classmethod
    def from_json(cls, data: Iterable[Mapping[str, int]]) -> "GradedCoefficient":
        return cls({(t["a"], t["b"], t["c"], t["e"]): Fraction(t["num"], t["den"]) for t in data})


def _frac_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _monomial_text(exp: Exponent) -> str:
    a, b, c, e = exp
    parts = []
    if a:
        parts.append("d" if a == 2 else f"d^({_frac_text(Fraction(a, 2))})")
    for name, k in (("hbar", b), ("N", c), ("lambda", e)):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def _monomial_latex(exp: Exponent) -> str:
    a, b, c, e = exp
    parts = []
    if a:
        parts.append("d" if a == 2 else f"d^{{{_frac_text(Fraction(a, 2))}}}")
    for name, k in ((r"\hbar", b), ("N", c), (r"\lambda", e)):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{{{k}}}")
    return " ".join(parts)


def _coerce(x: object) -> GradedCoefficient:
    if isinstance(x, GradedCoefficient):
        return x
    if isinstance(x, (int, Fraction)):
        return GradedCoefficient.const(x)
    return NotImplemented  # type: ignore[return-value]


ZERO = GradedCoefficient()
ONE = GradedCoefficient.const(1)
N = GradedCoefficient.monomial(c=1)
HBAR = GradedCoefficient.monomial(b=1)
LAMBDA = GradedCoefficient.monomial(e=1)
SQRT_D = GradedCoefficient.monomial(a=1)


def scalar_add(x: GradedCoefficient, y: GradedCoefficient) -> GradedCoefficient:
    return x + y


def scalar_mul(x: GradedCoefficient, y: GradedCoefficient) -> GradedCoefficient:
    return x * y


class DoubleSubstitutionError(ValueError):
    """Raised when reparametrize sees a coefficient that already contains d or lambda."""


def reparametrize(x: GradedCoefficient) -> GradedCoefficient:
    """Substitute N -> lambda * d^(-1/2) and hbar -> d^(1/2).

    Each monomial hbar^b N^c becomes d^((b - c)/2) lambda^c.
    """
    out: Dict[Exponent, Fraction] = {}
    for (a, b, c, e), val in x._terms.items():
        if a or e:
            raise DoubleSubstitutionError(f"coefficient {x} already contains d or lambda")
        key = (b - c, 0, 0, c)
        out[key] = out.get(key, 0) + val
    return GradedCoefficient(out)


def specialize_N(x: GradedCoefficient, n: Number) -> GradedCoefficient:
    """Evaluate N at the rational ``n``; other variables are untouched."""
    n = Fraction(n)
    out: Dict[Exponent, Fraction] = {}
    for (a, b, c, e), val in x._terms.items():
        key = (a, b, 0, e)
        out[key] = out.get(key, 0) + val * n**c
    return GradedCoefficient(out)


def specialize_hbar(x: GradedCoefficient, h: Number) -> GradedCoefficient:
    h = Fraction(h)
    out: Dict[Exponent, Fraction] = {}
    for (a, b, c, e), val in x._terms.items():
        key = (a, 0, c, e)
        out[key] = out.get(key, 0) + val * h**b
    return GradedCoefficient(out)


def d_part(x: GradedCoefficient, a: int) -> GradedCoefficient:
    """Coefficient of d^(a/2), returned as a polynomial without d."""
    return GradedCoefficient({(0, b, c, e): v for (aa, b, c, e), v in x._terms.items() if aa == a})
