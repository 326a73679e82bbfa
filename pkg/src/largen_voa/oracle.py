"""A slow second route to singular OPEs through walled-Brauer diagram composition.

Each multi-trace becomes a tensor product of closed chains ``1 -> ([1,1])^n``.
A contraction set becomes a diagram ``([1,1])^n -> ([1,1])^m`` that caps each
contracted pair (black of one letter to white of the other, twice) and runs
straight strands through the survivors.  Composing the two gives N^loops times
a diagram whose chains are the output traces.  Signs come from one global
permutation, and the expansion at w applies ∂_z repeatedly by Leibniz.

Used in tests to cross-check :func:`largen_voa.ope.singular_ope`.
"""

from __future__ import annotations

import itertools
import os
from fractions import Fraction
from math import factorial
from typing import Dict, List, Sequence, Tuple

from .algebra import PairingTable
from .brst import RefusalError
from .diagrams import BLACK, WHITE, Diagram, compose, tensor, trace_diagram
from .ope import OPEResult, contract_pair
from .operators import Letter, MultiTrace, OperatorSum, canonical_product
from .scalars import GradedCoefficient

MAX_LETTERS_ENV = "LARGEN_VOA_ORACLE_MAX_LETTERS"
DEFAULT_MAX_LETTERS = 8


class OracleSizeError(RefusalError):
    """The operators are too large for diagram enumeration."""


def oracle_max_letters() -> int:
    return int(os.environ.get(MAX_LETTERS_ENV, DEFAULT_MAX_LETTERS))


def _chains(m: MultiTrace, b: MultiTrace) -> Diagram:
    out = Diagram((), (), ())
    for t in tuple(m) + tuple(b):
        out = tensor(out, trace_diagram(len(t)))
    return out


def _cap_diagram(n: int, pairs: Sequence[Tuple[int, int]], survivors: Sequence[int]) -> Diagram:
    top = (BLACK, WHITE) * n
    bottom = (BLACK, WHITE) * len(survivors)
    edges = []
    for i, j in pairs:
        edges.append((2 * i, 2 * j + 1))  # row of X to column of Y
        edges.append((2 * i + 1, 2 * j))  # column of X to row of Y
    base = 2 * n
    for r, k in enumerate(survivors):
        edges.append((2 * k, base + 2 * r))
        edges.append((2 * k + 1, base + 2 * r + 1))
    return Diagram(top, bottom, tuple(edges))


def _read_cycles(d: Diagram, m: int) -> List[List[int]]:
    """Output chains as lists of survivor positions, following white-to-black edges."""
    partner = d.partner()
    nxt = {r: partner[2 * r + 1] // 2 for r in range(m)}
    seen = set()
    cycles = []
    for r in range(m):
        if r in seen:
            continue
        cyc = []
        x = r
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = nxt[x]
        cycles.append(cyc)
    return cycles


def _permutation_sign(order: Sequence[int], parity: Sequence[int]) -> int:
    odd = [k for k in order if parity[k]]
    inv = sum(1 for x, y in itertools.combinations(odd, 2) if x > y)
    return -1 if inv & 1 else 1


def _contraction_sets(letters: Sequence[Letter], na: int, table: PairingTable):
    """All nonempty injective partial maps from A-slots to B-slots with nonzero pairing."""
    nb = len(letters) - na
    for size in range(1, min(na, nb) + 1):
        for left in itertools.combinations(range(na), size):
            for right in itertools.permutations(range(na, na + nb), size):
                pairs = tuple(zip(left, right))
                if all(table(letters[i].name, letters[j].name) for i, j in pairs):
                    yield pairs


Tagged = Tuple[Tuple[Tuple[Letter, bool], ...], ...]


def _leibniz(traces: Tagged, order: int) -> Dict[MultiTrace, Fraction]:
    """(1/order!) ∂_z^order of the bilocal product, then z = w."""
    terms: Dict[Tagged, int] = {traces: 1}
    for _ in range(order):
        nxt: Dict[Tagged, int] = {}
        for tr, c in terms.items():
            for ti, t in enumerate(tr):
                for li, (x, at_z) in enumerate(t):
                    if at_z:
                        t2 = t[:li] + ((x.raised(), True),) + t[li + 1 :]
                        key = tr[:ti] + (t2,) + tr[ti + 1 :]
                        nxt[key] = nxt.get(key, 0) + c
        terms = nxt
    out: Dict[MultiTrace, Fraction] = {}
    for tr, c in terms.items():
        res = canonical_product([tuple(x for x, _ in t) for t in tr])
        if res is None:
            continue
        sign, mt = res
        out[mt] = out.get(mt, 0) + Fraction(sign * c, factorial(order))
    return {k: v for k, v in out.items() if v}


def _multitrace_ope(a: MultiTrace, b: MultiTrace, table: PairingTable) -> Dict[int, Dict[MultiTrace, GradedCoefficient]]:
    letters = [x for t in a for x in t] + [x for t in b for x in t]
    na = sum(len(t) for t in a)
    n = len(letters)
    parity = [x.ghost & 1 for x in letters]
    chains = _chains(a, b)
    out: Dict[int, Dict[MultiTrace, GradedCoefficient]] = {}
    for pairs in _contraction_sets(letters, na, table):
        used = {k for p in pairs for k in p}
        survivors = [k for k in range(n) if k not in used]
        composite = compose(_cap_diagram(n, pairs, survivors), chains)
        ((diagram, coeff),) = composite.terms.items()
        loops = max(e[2] for e in coeff.terms)  # coefficient is exactly N^loops
        cycles = _read_cycles(diagram, len(survivors))
        order = [k for p in pairs for k in p] + [survivors[r] for c in cycles for r in c]
        sign = _permutation_sign(order, parity)
        value, pole = Fraction(sign), 0
        for i, j in pairs:
            v, p = contract_pair(letters[i], letters[j], table)
            value *= v
            pole += p
        tagged = tuple(tuple((letters[survivors[r]], survivors[r] < na) for r in c) for c in cycles)
        monomial = GradedCoefficient.monomial(b=len(pairs), c=loops)
        for m in range(pole):
            slot = out.setdefault(pole - m, {})
            for mt, w in _leibniz(tagged, m).items():
                slot[mt] = slot.get(mt, GradedCoefficient()) + monomial * (value * w)
    return out


def singular_ope_via_diagrams(a: OperatorSum, b: OperatorSum, table: PairingTable) -> OPEResult:
    limit = oracle_max_letters()
    poles: Dict[int, OperatorSum] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            size = sum(len(t) for t in ma) + sum(len(t) for t in mb)
            if size > limit:
                raise OracleSizeError(
                    f"{size} letters exceed the diagram oracle limit {limit} (set {MAX_LETTERS_ENV} to change it)"
                )
            for p, terms in _multitrace_ope(ma, mb, table).items():
                target = poles.setdefault(p, OperatorSum())
                for mt, c in terms.items():
                    target.add_term(mt, c * ca * cb)
    return OPEResult(poles)
