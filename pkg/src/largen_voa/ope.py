"""Wick-contraction OPEs of normally ordered multi-trace operators.

For multi-traces ``A(z)`` and ``B(w)`` every contraction set pairs letters
of ``A`` with letters of ``B``.  A pair ``∂^m X(z) ∂^n Y(w)`` contributes
``omega(X, Y) (-1)^m (m+n)! / (z-w)^(m+n+1)`` and the matrix indices are
reconnected by ``<X_ij Y_kl> ~ δ_il δ_jk``; index cycles left without a letter
become factors of N.  Each contraction carries one power of hbar.  Surviving
letters of ``A`` are Taylor-expanded around ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .algebra import PairingTable
from .operators import (
    Letter,
    MultiTrace,
    OperatorSum,
    canonical_product,
    derivative,
)
from .scalars import GradedCoefficient, reparametrize

ContractionSet = Tuple[Tuple[int, int], ...]
TaggedTrace = Tuple[Tuple[Letter, bool], ...]  # (letter, sits at z?)


class ContractionError(ValueError):
    """A contraction set is malformed for the given operators."""


@dataclass
class OPEResult:
    """Singular part of an OPE: pole order -> operator coefficient at w."""

    poles: Dict[int, OperatorSum] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.poles = {p: x for p, x in self.poles.items() if not x.is_zero()}

    def __getitem__(self, p: int) -> OperatorSum:
        return self.poles.get(p, OperatorSum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OPEResult):
            return NotImplemented
        return self.poles == other.poles

    def is_zero(self) -> bool:
        return not self.poles

    def max_pole(self) -> int:
        return max(self.poles, default=0)

    def __add__(self, other: "OPEResult") -> "OPEResult":
        out = dict(self.poles)
        for p, x in other.poles.items():
            out[p] = out[p] + x if p in out else x
        return OPEResult(out)

    def scale(self, c) -> "OPEResult":
        return OPEResult({p: x.scale(c) for p, x in self.poles.items()})

    def map(self, fn: Callable[[OperatorSum], OperatorSum]) -> "OPEResult":
        return OPEResult({p: fn(x) for p, x in self.poles.items()})

    def __str__(self) -> str:
        from .render import poles_to_text

        return poles_to_text(self.poles)


# ---------------------------------------------------------------------------
# single pairs


def contract_pair(x: Letter, y: Letter, table: PairingTable) -> Tuple[Fraction, int]:
    """Value and pole order of the contraction of ``x(z)`` with ``y(w)``."""
    w = table(x.name, y.name)
    if not w:
        raise ContractionError(f"{x} and {y} do not contract")
    if w.denominator == 1:
        w = w.numerator
    sign = -1 if x.deriv & 1 else 1
    return sign * w * factorial(x.deriv + y.deriv), x.deriv + y.deriv + 1


# ---------------------------------------------------------------------------
# layout and enumeration


@lru_cache(maxsize=1 << 16)
def _flatten(a: MultiTrace, b: MultiTrace):
    """Letters in linear order with their row/column index labels and trace ids."""
    letters: List[Letter] = []
    rows: List[int] = []
    cols: List[int] = []
    tids: List[int] = []
    base = 0
    tid = 0
    for m in (a, b):
        for t in m:
            n = len(t)
            for k, x in enumerate(t):
                letters.append(x)
                rows.append(base + k)
                cols.append(base + (k + 1) % n)
                tids.append(tid)
            base += n
            tid += 1
    return tuple(letters), tuple(rows), tuple(cols), tuple(tids)


def enumerate_contraction_sets(a: MultiTrace, b: MultiTrace, table: PairingTable) -> Iterator[ContractionSet]:
    """All nonempty partial matchings between letters of ``a`` and ``b`` with nonzero pairing.

    Slots are numbered in the linear order (letters of ``a`` first).
    """
    letters, _, _, _ = _flatten(a, b)
    na = sum(len(t) for t in a)
    nb = len(letters) - na
    options = [
        [na + j for j in range(nb) if table(letters[i].name, letters[na + j].name)]
        for i in range(na)
    ]
    used = [False] * (na + nb)
    acc: List[Tuple[int, int]] = []

    def rec(i: int) -> Iterator[ContractionSet]:
        if i == na:
            if acc:
                yield tuple(acc)
            return
        yield from rec(i + 1)
        for j in options[i]:
            if not used[j]:
                used[j] = True
                acc.append((i, j))
                yield from rec(i + 1)
                acc.pop()
                used[j] = False

    yield from rec(0)


class _UF:
    __slots__ = ("p",)

    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, x: int) -> int:
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.p[rx] = ry


def _koszul_reorder_sign(old: Sequence[int], new: Sequence[int], parity: Sequence[int]) -> int:
    """Sign of rearranging the odd items of ``old`` into the order ``new``."""
    pos = {v: i for i, v in enumerate(old)}
    odd = [pos[v] for v in new if parity[v]]
    inv = 0
    for i in range(len(odd)):
        for j in range(i + 1, len(odd)):
            if odd[i] > odd[j]:
                inv += 1
    return -1 if inv & 1 else 1


@dataclass(frozen=True)
class GlueResult:
    loops: int
    sign: int
    traces: Tuple[TaggedTrace, ...]


def glue(a: MultiTrace, b: MultiTrace, s: ContractionSet, pair_order: Optional[Sequence[int]] = None) -> GlueResult:
    """Index surgery for one contraction set.

    Pairs are processed leftmost-first unless ``pair_order`` (a permutation
    of the pair indices) says otherwise; the result must not depend on it.
    Each pair costs the Koszul sign of sliding the ``b``-letter leftwards
    until it sits right after its partner.
    """
    letters, rows, cols, _ = _flatten(a, b)
    na = sum(len(t) for t in a)
    n = len(letters)
    parity = [x.ghost & 1 for x in letters]
    seen = set()
    for i, j in s:
        if not (0 <= i < na <= j < n) or i in seen or j in seen:
            raise ContractionError(f"invalid contraction set {s}")
        seen.update((i, j))
        if parity[i] != parity[j]:
            raise ContractionError("contractions of odd total parity are not supported")
    pairs = sorted(s) if pair_order is None else [s[k] for k in pair_order]
    order = list(range(n))
    uf = _UF(n)
    sign = 1
    for i, j in pairs:
        pi, pj = order.index(i), order.index(j)
        lo, hi = (pi, pj) if pi < pj else (pj, pi)
        mover = j if pi < pj else i
        if parity[mover]:
            between = sum(parity[k] for k in order[lo + 1 : hi])
            if between & 1:
                sign = -sign
        del order[hi]
        del order[lo]
        uf.union(rows[i], cols[j])
        uf.union(cols[i], rows[j])
    remaining = order
    row_of = {uf.find(rows[k]): k for k in remaining}
    classes = {uf.find(l) for l in range(n)}
    loops = len(classes) - len(row_of)
    visited = set()
    cycles: List[List[int]] = []
    for k in remaining:
        if k in visited:
            continue
        cyc = [k]
        visited.add(k)
        nxt = row_of[uf.find(cols[k])]
        while nxt != k:
            cyc.append(nxt)
            visited.add(nxt)
            nxt = row_of[uf.find(cols[nxt])]
        cycles.append(cyc)
    concat = [k for c in cycles for k in c]
    sign *= _koszul_reorder_sign(remaining, concat, parity)
    traces = tuple(tuple((letters[k], k < na) for k in c) for c in cycles)
    return GlueResult(loops, sign, traces)


def pair_value(a: MultiTrace, b: MultiTrace, s: ContractionSet, table: PairingTable) -> Tuple[Fraction, int]:
    letters, _, _, _ = _flatten(a, b)
    val = 1
    pole = 0
    for i, j in s:
        v, p = contract_pair(letters[i], letters[j], table)
        val *= v
        pole += p
    return val, pole


# ---------------------------------------------------------------------------
# Taylor expansion of the z-letters at w


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def taylor_at_w(traces: Tuple[TaggedTrace, ...], order: int) -> Tuple[Tuple[MultiTrace, Fraction], ...]:
    """Coefficient of (z-w)^order in the bilocal product, as canonical multi-traces at w."""
    zpos = [(ti, li) for ti, t in enumerate(traces) for li, (_, at_z) in enumerate(t) if at_z]
    acc: Dict[MultiTrace, Fraction] = {}
    for comp in _compositions(order, len(zpos)):
        bump = dict(zip(zpos, comp))
        den = 1
        for m in comp:
            if m > 1:
                den *= factorial(m)
        weight = 1 if den == 1 else Fraction(1, den)
        raw = [
            tuple(x.raised(bump.get((ti, li), 0)) if at_z else x for li, (x, at_z) in enumerate(t))
            for ti, t in enumerate(traces)
        ]
        res = canonical_product(raw)
        if res is None:
            continue
        sign, mt = res
        acc[mt] = acc.get(mt, 0) + sign * weight
    return tuple((k, v) for k, v in acc.items() if v)


# ---------------------------------------------------------------------------
# planarity


def ribbon_faces(a: MultiTrace, b: MultiTrace, s: ContractionSet) -> Tuple[int, int, int, bool]:
    """Ribbon graph of the traces touched by ``s``: (vertices, edges, faces, connected)."""
    letters, _, _, tids = _flatten(a, b)
    partner = {}
    for i, j in s:
        partner[i] = j
        partner[j] = i
    involved = sorted({tids[k] for k in partner})
    halfedges = [k for k in range(len(letters)) if tids[k] in set(involved)]
    # cyclic successor inside each trace
    succ = {}
    by_trace: Dict[int, List[int]] = {}
    for k in halfedges:
        by_trace.setdefault(tids[k], []).append(k)
    for ks in by_trace.values():
        for idx, k in enumerate(ks):
            succ[k] = ks[(idx + 1) % len(ks)]
    seen = set()
    faces = 0
    for h in halfedges:
        if h in seen:
            continue
        faces += 1
        x = h
        while x not in seen:
            seen.add(x)
            x = succ[partner.get(x, x)]
    uf = _UF(len(involved))
    idx = {t: n for n, t in enumerate(involved)}
    for i, j in s:
        uf.union(idx[tids[i]], idx[tids[j]])
    connected = len({uf.find(k) for k in range(len(involved))}) <= 1
    return len(involved), len(s), faces, connected


def is_planar_genus(a: MultiTrace, b: MultiTrace, s: ContractionSet) -> bool:
    """Two traces involved, connected, and Euler characteristic 2 (a sphere)."""
    v, e, f, connected = ribbon_faces(a, b, s)
    return connected and v == 2 and v - e + f == 2


def is_planar_iterative(a: MultiTrace, b: MultiTrace, s: ContractionSet) -> bool:
    """Apply pairs one at a time: exactly the first may join two different traces.

    Later pairs must have both letters in one current trace, which is what
    keeps the chords non-crossing.
    """
    if not s:
        return False
    letters, rows, cols, _ = _flatten(a, b)
    n = len(letters)
    uf = _UF(n)
    alive = set(range(n))
    for step, (i, j) in enumerate(sorted(s)):
        same = _current_trace_of(i, alive, rows, cols, uf) == _current_trace_of(j, alive, rows, cols, uf)
        if (step == 0) == same:
            return False
        alive.discard(i)
        alive.discard(j)
        uf.union(rows[i], cols[j])
        uf.union(cols[i], rows[j])
    return True


def _current_trace_of(k: int, alive, rows, cols, uf: _UF) -> frozenset:
    row_of = {uf.find(rows[x]): x for x in alive}
    cyc = {k}
    nxt = row_of[uf.find(cols[k])]
    while nxt != k:
        cyc.add(nxt)
        nxt = row_of[uf.find(cols[nxt])]
    return frozenset(cyc)


# ---------------------------------------------------------------------------
# assembling OPEs


@dataclass(frozen=True)
class ContractionTerm:
    pairs: ContractionSet
    value: Fraction  # pair values times the surgery sign
    pole: int
    loops: int
    traces: Tuple[TaggedTrace, ...]


@lru_cache(maxsize=None)
def contraction_terms(a: MultiTrace, b: MultiTrace, table: PairingTable) -> Tuple[ContractionTerm, ...]:
    out = []
    for s in enumerate_contraction_sets(a, b, table):
        val, pole = pair_value(a, b, s, table)
        g = glue(a, b, s)
        out.append(ContractionTerm(s, val * g.sign, pole, g.loops, g.traces))
    return tuple(out)


def _empty_term(a: MultiTrace, b: MultiTrace) -> ContractionTerm:
    traces = tuple(tuple((x, True) for x in t) for t in a) + tuple(tuple((x, False) for x in t) for t in b)
    return ContractionTerm((), Fraction(1), 0, 0, traces)


def _accumulate(
    acc: Dict[int, Dict[MultiTrace, Dict[Tuple[int, int], Fraction]]],
    pole_out: int,
    term: ContractionTerm,
    order: int,
) -> None:
    key = (len(term.pairs), term.loops)
    slot = acc.setdefault(pole_out, {})
    for mt, w in taylor_at_w(term.traces, order):
        d = slot.setdefault(mt, {})
        d[key] = d.get(key, 0) + term.value * w


def _finish(acc) -> Dict[int, Dict[MultiTrace, GradedCoefficient]]:
    out = {}
    for p, slot in acc.items():
        terms = {}
        for mt, d in slot.items():
            c = GradedCoefficient({(0, h, l, 0): v for (h, l), v in d.items()})
            if not c.is_zero():
                terms[mt] = c
        if terms:
            out[p] = terms
    return out


@lru_cache(maxsize=None)
def _singular_multitrace(a: MultiTrace, b: MultiTrace, table: PairingTable, planar: bool):
    acc: Dict = {}
    for term in contraction_terms(a, b, table):
        if planar and not is_planar_genus(a, b, term.pairs):
            continue
        for order in range(term.pole):
            _accumulate(acc, term.pole - order, term, order)
    return _finish(acc)


@lru_cache(maxsize=None)
def _mode_multitrace(a: MultiTrace, n: int, b: MultiTrace, table: PairingTable):
    acc: Dict = {}
    terms = contraction_terms(a, b, table)
    if n < 0:
        terms = (_empty_term(a, b),) + terms
    for term in terms:
        order = term.pole - n - 1
        if order >= 0:
            _accumulate(acc, 0, term, order)
    return _finish(acc).get(0, {})


def _bilinear(a: OperatorSum, b: OperatorSum, fn) -> Dict[int, OperatorSum]:
    poles: Dict[int, OperatorSum] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            c = ca * cb
            for p, terms in fn(ma, mb).items():
                target = poles.setdefault(p, OperatorSum())
                for mt, v in terms.items():
                    target.add_term(mt, v * c)
    return poles


def singular_ope(a: OperatorSum, b: OperatorSum, table: PairingTable) -> OPEResult:
    """Singular part of ``a(z) b(w)`` expanded at ``w``."""
    return OPEResult(_bilinear(a, b, lambda x, y: _singular_multitrace(x, y, table, False)))


def planar_singular_ope(a: OperatorSum, b: OperatorSum, table: PairingTable) -> OPEResult:
    """Singular OPE restricted to genus-zero contraction sets joining exactly two traces."""
    return OPEResult(_bilinear(a, b, lambda x, y: _singular_multitrace(x, y, table, True)))


def mode_product(a: OperatorSum, n: int, b: OperatorSum, table: PairingTable) -> OperatorSum:
    """``a_(n) b``: coefficient of (z-w)^(-n-1) in the full Wick expansion of ``a(z) b(w)``.

    For n >= 0 this is the pole-(n+1) coefficient of the singular OPE.  For
    n < 0 it also keeps the uncontracted term, so ``a_(-1) b`` is the normally
    ordered product including its contraction corrections.
    """
    poles = _bilinear(a, b, lambda x, y: {0: _mode_multitrace(x, n, y, table)})
    return OPEResult(poles)[0]


def ope_by_hbar_order(a: OperatorSum, b: OperatorSum, table: PairingTable) -> Dict[int, OPEResult]:
    """Singular OPE split by the number of contractions (instrumented enumeration)."""
    out: Dict[int, Dict[int, OperatorSum]] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            for term in contraction_terms(ma, mb, table):
                poles = out.setdefault(len(term.pairs), {})
                for order in range(term.pole):
                    target = poles.setdefault(term.pole - order, OperatorSum())
                    scale = ca * cb * GradedCoefficient.monomial(b=len(term.pairs), c=term.loops)
                    for mt, w in taylor_at_w(term.traces, order):
                        target.add_term(mt, scale * (term.value * w))
    return {k: OPEResult(v) for k, v in out.items()}


# ---------------------------------------------------------------------------
# vertex algebra identities


def _binom(x: int, j: int) -> Fraction:
    """Generalized binomial coefficient C(x, j) for any integer x and j >= 0."""
    out = Fraction(1)
    for i in range(j):
        out *= Fraction(x - i, i + 1)
    return out


def _max_pole(a: OperatorSum, b: OperatorSum, table: PairingTable) -> int:
    """Upper bound on the pole order of a(z) b(w)."""
    best = 0
    for ma in a.terms:
        for mb in b.terms:
            for term in contraction_terms(ma, mb, table):
                best = max(best, term.pole)
    return best


def skew_symmetry_rhs(a: OperatorSum, b: OperatorSum, n: int, table: PairingTable) -> OperatorSum:
    """-(-1)^{p_a p_b} Σ_j (-1)^{n+j} ∂^j/j! (b_(n+j) a)."""
    pa, pb = a.parity(), b.parity()
    top = _max_pole(b, a, table)
    out = OperatorSum()
    j = 0
    while n + j < top:
        term = derivative(mode_product(b, n + j, a, table), j).scale(Fraction(1, factorial(j)))
        sign = (1 if (n + j) % 2 == 0 else -1) * (1 if pa and pb else -1)
        out = out + term.scale(sign)
        j += 1
    return out


def skew_symmetry_check(a: OperatorSum, b: OperatorSum, n: int, table: PairingTable) -> bool:
    return mode_product(a, n, b, table) == skew_symmetry_rhs(a, b, n, table)


@dataclass
class BorcherdsReport:
    holds: bool
    inconclusive: bool
    lhs: OperatorSum
    rhs: OperatorSum

    def __bool__(self) -> bool:
        return self.holds and not self.inconclusive


def borcherds_sides(
    a: OperatorSum, b: OperatorSum, c: OperatorSum, m: int, k: int, l: int, table: PairingTable, cutoff: int = 64
) -> BorcherdsReport:
    """Both sides of the Borcherds identity

    Σ_j C(m,j) (a_(l+j) b)_(m+k-j) c
        = Σ_j (-1)^j C(l,j) [a_(m+l-j)(b_(k+j) c) - (-1)^l (-1)^{p_a p_b} b_(k+l-j)(a_(m+j) c)].
    """
    pa, pb = a.parity(), b.parity()
    eps = -1 if pa and pb else 1
    top_ab = _max_pole(a, b, table)
    lhs = OperatorSum()
    j = 0
    inconclusive = False
    while l + j < top_ab:
        if j > cutoff:
            inconclusive = True
            break
        coeff = _binom(m, j)
        if coeff:
            inner = mode_product(a, l + j, b, table)
            lhs = lhs + mode_product(inner, m + k - j, c, table).scale(coeff)
        j += 1
    top_bc = _max_pole(b, c, table)
    top_ac = _max_pole(a, c, table)
    rhs = OperatorSum()
    j = 0
    while k + j < top_bc or m + j < top_ac:
        if j > cutoff:
            inconclusive = True
            break
        coeff = _binom(l, j) * (-1) ** j
        if coeff:
            if k + j < top_bc:
                rhs = rhs + mode_product(a, m + l - j, mode_product(b, k + j, c, table), table).scale(coeff)
            if m + j < top_ac:
                t2 = mode_product(b, k + l - j, mode_product(a, m + j, c, table), table)
                rhs = rhs - t2.scale(coeff * (1 if l % 2 == 0 else -1) * eps)
        j += 1
    return BorcherdsReport(lhs == rhs, inconclusive, lhs, rhs)


def borcherds_check(a, b, c, m: int, k: int, l: int, table: PairingTable, cutoff: int = 64) -> bool:
    return bool(borcherds_sides(a, b, c, m, k, l, table, cutoff))


# ---------------------------------------------------------------------------
# Rees grading and the planar limit


def rees_exponents(a: MultiTrace, b: MultiTrace, out: MultiTrace) -> int:
    """Exponent of d^(1/2) attached when each operator carries d^(1/2) per trace."""
    return len(a) + len(b) - len(out)


@dataclass
class GradingViolation:
    inputs: Tuple[MultiTrace, MultiTrace]
    pole: int
    output: MultiTrace
    exponent: Tuple[int, int, int]
    reason: str


@dataclass
class GradingReport:
    checked: int = 0
    violations: List[GradingViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def grading_check(a: OperatorSum, b: OperatorSum, table: PairingTable) -> GradingReport:
    """Check every singular coefficient d^(a/2) hbar^b N^c for c >= 0, b >= c and a+b-c positive even."""
    report = GradingReport()
    for ma in a.terms:
        for mb in b.terms:
            for p, terms in _singular_multitrace(ma, mb, table, False).items():
                for mt, coeff in terms.items():
                    ea = rees_exponents(ma, mb, mt)
                    for (_, hb, nc, _), _v in coeff.terms.items():
                        report.checked += 1
                        total = ea + hb - nc
                        reason = None
                        if nc < 0:
                            reason = "negative power of N"
                        elif hb - nc < 0:
                            reason = "more loops than contractions"
                        elif total <= 0 or total % 2:
                            reason = "a+b-c is not a positive even integer"
                        if reason:
                            report.violations.append(GradingViolation((ma, mb), p, mt, (ea, hb, nc), reason))
    return report


def rees_reparametrized_ope(a: OperatorSum, b: OperatorSum, table: PairingTable, planar: bool = False) -> OPEResult:
    """OPE of the rescaled operators, with N = lambda d^(-1/2) and hbar = d^(1/2).

    Coefficients are expressed against rescaled output operators.
    """
    poles: Dict[int, OperatorSum] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            c = ca * cb
            for p, terms in _singular_multitrace(ma, mb, table, planar).items():
                target = poles.setdefault(p, OperatorSum())
                for mt, v in terms.items():
                    shift = GradedCoefficient.monomial(a=rees_exponents(ma, mb, mt))
                    target.add_term(mt, reparametrize(v * c) * shift)
    return OPEResult(poles)


def d_coefficient(x: OPEResult, a_exp: int) -> OPEResult:
    """Coefficient of d^(a_exp/2), keeping the remaining variables."""
    from .scalars import d_part

    return x.map(lambda op: op.map_coefficients(lambda c: d_part(c, a_exp)))


def min_d_exponent(x: OPEResult) -> Optional[int]:
    exps = [e[0] for op in x.poles.values() for c in op.terms.values() for e in c.terms]
    return min(exps) if exps else None
