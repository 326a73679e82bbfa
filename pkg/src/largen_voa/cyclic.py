"""Cyclic cochains on A[[t]], the Hochschild differential, and the cochain-to-operator map.

An argument of a cochain is a pair ``(i, k)`` standing for ``e_i t^k``.  A
cochain ``f`` with n arguments becomes the single-trace operator

    Phi_f = 1/n * sum_I f(I) * kappa(I) * Tr(∂^{k1} phi^{i1}/k1! ... ∂^{kn} phi^{in}/kn!)

with ``kappa`` the Koszul sign of separating algebra elements from fields.
Rotating an argument list changes ``f`` by the sign that keeps ``Phi_f``
fixed; that is what "cyclic" means here.

The differential is

    (b f)(a_1..a_{n+1}) = (-1)^D [ sum_{i=1}^{n} (-1)^{i-1} f(.., a_i a_{i+1}, ..)
                                   + (-1)^{n + |a_{n+1}|(|a_1|+..+|a_n|)} f(a_{n+1} a_1, a_2, .., a_n) ]

where ``D = |a_1| + ... + |a_{n+1}|``.  With these signs the single
contraction part of Q satisfies ``Q_0 Phi_f = Phi_{b f}``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, Iterator, List, Optional, Tuple

from .algebra import CyclicAlgebraSpec
from .brst import BRST, RefusalError, koszul_kappa
from .operators import OperatorSum, letter
from .scalars import GradedCoefficient

Arg = Tuple[int, int]  # (basis index, power of t)
Args = Tuple[Arg, ...]


@dataclass(frozen=True)
class Truncation:
    max_arity: int
    max_t: int  # bound on the total t-degree of an argument list


@dataclass
class CyclicCochain:
    arity: int
    entries: Dict[Args, Fraction] = field(default_factory=dict)
    truncation: Truncation = Truncation(4, 2)

    def __post_init__(self) -> None:
        clean = {}
        for args, v in self.entries.items():
            args = tuple((int(i), int(k)) for i, k in args)
            if len(args) != self.arity:
                raise ValueError(f"argument list {args} does not have arity {self.arity}")
            if self.arity > self.truncation.max_arity or sum(k for _, k in args) > self.truncation.max_t:
                raise RefusalError(f"argument list {args} lies outside the truncation {self.truncation}")
            v = Fraction(v)
            if v:
                clean[args] = clean.get(args, Fraction(0)) + v
        self.entries = {k: v for k, v in clean.items() if v}

    def __call__(self, *args: Arg) -> Fraction:
        return self.entries.get(tuple(args), Fraction(0))

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CyclicCochain):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.arity == other.arity and self.entries == other.entries

    def scale(self, c) -> "CyclicCochain":
        return CyclicCochain(self.arity, {k: v * c for k, v in self.entries.items()}, self.truncation)

    def __add__(self, other: "CyclicCochain") -> "CyclicCochain":
        if self.arity != other.arity:
            raise ValueError("cannot add cochains of different arity")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return CyclicCochain(self.arity, out, self.truncation)


def _degree(spec: CyclicAlgebraSpec, args: Args) -> int:
    return sum(spec.degree(i) for i, _ in args)


def _rotate(args: Args) -> Args:
    return (args[-1],) + args[:-1]


def rotation_sign(spec: CyclicAlgebraSpec, args: Args) -> int:
    """Sign e with f(rotate(args)) = e * f(args) for a cyclic f.

    It is the sign that makes the two terms of Phi_f agree: the change in
    kappa times the Koszul sign of moving the last trace letter to the front.
    """
    par = [spec.degree(i) - 1 & 1 for i, _ in args]
    rest = sum(par[:-1])
    tr_sign = -1 if par[-1] and rest & 1 else 1
    return koszul_kappa(par) * koszul_kappa([par[-1]] + par[:-1]) * tr_sign


def cyclic_symmetrize(f: CyclicCochain, spec: CyclicAlgebraSpec) -> CyclicCochain:
    """Average over rotations with the cyclic signs; a projector onto cyclic cochains."""
    out: Dict[Args, Fraction] = {}
    n = f.arity
    for args, v in f.entries.items():
        cur, sign = args, 1
        for _ in range(n):
            out[cur] = out.get(cur, 0) + Fraction(sign) * v / n
            sign *= rotation_sign(spec, cur)
            cur = _rotate(cur)
    return CyclicCochain(n, out, f.truncation)


def is_cyclic(f: CyclicCochain, spec: CyclicAlgebraSpec) -> bool:
    return cyclic_symmetrize(f, spec) == f


def _splits(spec: CyclicAlgebraSpec) -> Dict[int, List[Tuple[int, int, Fraction]]]:
    """For each basis index r, the pairs (p, q) with nonzero coefficient of e_r in e_p e_q."""
    out: Dict[int, List[Tuple[int, int, Fraction]]] = {}
    for p in range(spec.dim):
        for q in range(spec.dim):
            for r, c in enumerate(spec.mul(p, q)):
                if c:
                    out.setdefault(r, []).append((p, q, c))
    return out


def hochschild_b(f: CyclicCochain, spec: CyclicAlgebraSpec) -> CyclicCochain:
    """Graded Hochschild differential; refuses if arity n+1 exceeds the truncation."""
    n = f.arity
    if n + 1 > f.truncation.max_arity:
        raise RefusalError(f"b raises arity to {n + 1}, beyond the truncation max_arity={f.truncation.max_arity}")
    splits = _splits(spec)
    out: Dict[Args, Fraction] = {}

    def add(args: Args, v: Fraction) -> None:
        sign = -1 if _degree(spec, args) & 1 else 1
        out[args] = out.get(args, 0) + sign * v

    for args, val in f.entries.items():
        for pos, (r, k) in enumerate(args):
            for p, q, c in splits.get(r, ()):
                for k1 in range(k + 1):
                    a, b = (p, k1), (q, k - k1)
                    # a_{pos+1} a_{pos+2} collapsed into slot pos
                    new = args[:pos] + (a, b) + args[pos + 1 :]
                    add(new, (-1 if pos & 1 else 1) * c * val)
                    if pos == 0:
                        # wrap term: a_{n+1} = a, a_1 = b
                        wrapped = (b,) + args[1:] + (a,)
                        d_last = spec.degree(p)
                        d_rest = _degree(spec, wrapped[:-1])
                        sign = -1 if (n + d_last * d_rest) & 1 else 1
                        add(wrapped, sign * c * val)
    return CyclicCochain(n + 1, out, f.truncation)


def cochain_to_operator(f: CyclicCochain, spec: CyclicAlgebraSpec) -> OperatorSum:
    fields = spec.fields()
    out = OperatorSum()
    for args, v in f.entries.items():
        den = f.arity
        for _, k in args:
            den *= factorial(k)
        kappa = koszul_kappa([fields[i].parity for i, _ in args])
        out = out + OperatorSum.trace(*(letter(fields[i], k) for i, k in args), coeff=Fraction(kappa) * v / den)
    return out


def single_contraction_part(x: OperatorSum) -> OperatorSum:
    """The hbar^1 part of x with hbar removed."""
    return x.map_coefficients(
        lambda c: GradedCoefficient({(a, 0, n, e): v for (a, h, n, e), v in c.terms.items() if h == 1})
    )


@dataclass
class ClassicalComparison:
    holds: bool
    q0: OperatorSum
    phi_bf: OperatorSum

    def __bool__(self) -> bool:
        return self.holds


def classical_limit_compare(f: CyclicCochain, spec: CyclicAlgebraSpec, brst: Optional[BRST] = None) -> ClassicalComparison:
    """Compare the hbar^1 part of Q(Phi_f) with Phi_{b f}."""
    brst = brst or BRST(spec)
    bf = hochschild_b(f, spec)
    q0 = single_contraction_part(brst.Q(cochain_to_operator(f, spec)))
    phi_bf = cochain_to_operator(bf, spec)
    return ClassicalComparison(q0 == phi_bf, q0, phi_bf)


# ---------------------------------------------------------------------------
# bases and random cochains


def argument_lists(spec: CyclicAlgebraSpec, arity: int, max_t: int) -> Iterator[Args]:
    slots = [(i, k) for i in range(spec.dim) for k in range(max_t + 1)]
    for args in itertools.product(slots, repeat=arity):
        if sum(k for _, k in args) <= max_t:
            yield args


def cyclic_basis(spec: CyclicAlgebraSpec, max_arity: int, max_t: int, truncation: Optional[Truncation] = None) -> List[CyclicCochain]:
    """One symmetrized delta cochain per rotation orbit that does not vanish."""
    trunc = truncation or Truncation(max_arity + 1, max_t)
    out = []
    for n in range(1, max_arity + 1):
        seen = set()
        for args in argument_lists(spec, n, max_t):
            orbit = {args}
            cur = args
            for _ in range(n - 1):
                cur = _rotate(cur)
                orbit.add(cur)
            rep = min(orbit)
            if rep in seen:
                continue
            seen.add(rep)
            f = cyclic_symmetrize(CyclicCochain(n, {rep: 1}, trunc), spec)
            if not f.is_zero():
                out.append(f)
    return out


def random_cochain(spec: CyclicAlgebraSpec, arity: int, max_t: int, rng: random.Random, terms: int = 3,
                   truncation: Optional[Truncation] = None) -> CyclicCochain:
    trunc = truncation or Truncation(arity + 2, max_t)
    lists = list(argument_lists(spec, arity, max_t))
    entries = {rng.choice(lists): Fraction(rng.randint(-3, 3)) for _ in range(terms)}
    return CyclicCochain(arity, entries, trunc)
