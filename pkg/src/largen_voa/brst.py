"""The BRST current of a cyclic algebra, its zero mode Q, and truncated cohomology.

The current is built from the structure constants,

    J = C * sum_n sum_I (e_{i0}, m_n(e_{i1}, ..., e_{in})) / (n+1)! * kappa(I) * Tr(phi^{i0} ... phi^{in}),

where ``kappa(I)`` is the Koszul sign of pulling every algebra element to the
left of every field in ``Tr((e phi)^{i0} ... (e phi)^{in})`` and C is
:data:`BRST_NORMALIZATION`.  ``Q = J_(0)``.

Cohomology is computed on sectors of fixed conformal weight ``h`` and ghost
number ``g``.  Q preserves ``h`` and lowers ``g`` by one, and each sector is
finite, so a sector is a complete piece of the complex.  Letter/derivative
truncations are not Q-stable (Q adds a letter), so only sectors that lie
entirely inside the requested truncation are used.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import CyclicAlgebraSpec, pairing_inverse
from .linalg import rank_at, rank_generic
from .ope import OPEResult, mode_product, singular_ope
from .operators import (
    UNIT,
    FieldSymbol,
    MultiTrace,
    OperatorSum,
    enumerate_basis,
    letter,
    multitrace_ghost,
    multitrace_key,
    multitrace_letters,
    multitrace_weight2,
)
from .scalars import GradedCoefficient, specialize_hbar

BRST_NORMALIZATION = Fraction(2)
"""Overall constant C; it makes the eps2 current exactly Tr(bcc) + Tr(c[Z1,Z2])."""


class RefusalError(RuntimeError):
    """A computation was refused because its preconditions do not hold."""


def koszul_kappa(parities: Sequence[int]) -> int:
    """Sign of rewriting (e_1 phi_1)...(e_n phi_n) as (e_1...e_n)(phi_1...phi_n).

    Field parities are ``p_k``; algebra element parities are ``p_k + 1``.
    """
    s = 0
    for k in range(len(parities)):
        if parities[k]:
            for l in range(k + 1, len(parities)):
                if not parities[l]:
                    s += 1
    return -1 if s & 1 else 1


def _products(spec: CyclicAlgebraSpec) -> Dict[int, Dict[Tuple[int, ...], Sequence[Fraction]]]:
    tables: Dict[int, Dict[Tuple[int, ...], Sequence[Fraction]]] = {2: dict(spec.m2)}
    for n, table in spec.higher.items():
        tables[n] = dict(table)
    return tables


def brst_field_raw(spec: CyclicAlgebraSpec) -> OperatorSum:
    """The structure-constant sum without the overall constant C."""
    fields = spec.fields()
    out = OperatorSum()
    for n, table in sorted(_products(spec).items()):
        for args, vec in table.items():
            if not any(vec):
                continue
            for i0 in range(spec.dim):
                pairing = spec.tr(spec.mul_vectors([Fraction(int(k == i0)) for k in range(spec.dim)], vec))
                if not pairing:
                    continue
                idx = (i0,) + tuple(args)
                kappa = koszul_kappa([fields[i].parity for i in idx])
                coeff = pairing * kappa / factorial(n + 1)
                out = out + OperatorSum.trace(*(letter(fields[i]) for i in idx), coeff=coeff)
    return out


def build_brst_field(spec: CyclicAlgebraSpec) -> OperatorSum:
    return brst_field_raw(spec).scale(BRST_NORMALIZATION)


class BRST:
    """Bundles a spec with its pairing table and current."""

    def __init__(self, spec: CyclicAlgebraSpec):
        self.spec = spec
        self.table, self.fields, self.eta = pairing_inverse(spec)
        self.J = build_brst_field(spec)

    def Q(self, x: OperatorSum) -> OperatorSum:
        return mode_product(self.J, 0, x, self.table)

    def jj(self) -> OPEResult:
        return singular_ope(self.J, self.J, self.table)


def brst_differential(spec: CyclicAlgebraSpec, x: OperatorSum) -> OperatorSum:
    return BRST(spec).Q(x)


# ---------------------------------------------------------------------------
# Q^2


@dataclass
class QSquaredReport:
    holds: bool
    jj: OPEResult
    witness: Optional[Tuple[MultiTrace, OperatorSum]] = None
    checked: int = 0
    total: int = 0
    complete: bool = True
    seconds: float = 0.0
    letters_covered: int = 0  # every basis operator with at most this many letters was checked

    def __bool__(self) -> bool:
        return self.holds


def q_squared_check(
    spec: CyclicAlgebraSpec,
    max_letters: int,
    max_deriv: int,
    time_budget: Optional[float] = None,
    basis: Optional[Iterable[MultiTrace]] = None,
) -> QSquaredReport:
    """Check that J has regular self-OPE and that Q(Q(x)) = 0 on every basis element.

    The first failure found is returned as the witness.  Operators are
    scanned smallest first.  With a time budget the scan may stop early;
    ``complete`` then reports False and ``holds`` only speaks for the
    ``checked`` elements.
    """
    start = time.monotonic()
    brst = BRST(spec)
    jj = brst.jj()
    if not jj.is_zero():
        p = jj.max_pole()
        return QSquaredReport(False, jj, ((), jj[p]), 0, 0, True, time.monotonic() - start)
    items = list(basis) if basis is not None else enumerate_basis(brst.fields, max_letters, max_deriv)
    items.sort(key=multitrace_key)
    report = QSquaredReport(True, jj, total=len(items))
    for m in items:
        if time_budget is not None and time.monotonic() - start > time_budget:
            report.complete = False
            report.letters_covered = multitrace_letters(m) - 1
            break
        qq = brst.Q(brst.Q(OperatorSum({m: GradedCoefficient.const(1)})))
        report.checked += 1
        if not qq.is_zero():
            report.holds = False
            report.witness = (m, qq)
            break
    if report.complete and report.holds:
        report.letters_covered = max((multitrace_letters(m) for m in items), default=0)
    report.seconds = time.monotonic() - start
    return report


# ---------------------------------------------------------------------------
# cohomology on (weight, ghost) sectors

Sector = Tuple[Fraction, int]


def multitrace_weight(m: MultiTrace) -> Fraction:
    return Fraction(multitrace_weight2(m), 2)


def _max_deriv(m: MultiTrace) -> int:
    return max((x.deriv for t in m for x in t), default=0)


def sector_basis(fields: Sequence[FieldSymbol], h: Fraction, g: int) -> List[MultiTrace]:
    """Every nonzero multi-trace of weight h and ghost g, the unit included.

    Fields have weight (ghost+1)/2 and each derivative adds 1.  Weight-zero
    fields carry ghost -1, so at most 2h - g letters fit in a sector.
    """
    h = Fraction(h)
    if h < 0:
        return []
    if min(f.ghost for f in fields) < -1:
        raise RefusalError("fields of negative weight make sectors infinite")
    out = [UNIT] if (h == 0 and g == 0) else []
    max_letters = int(2 * h - g)
    if max_letters <= 0:
        return out
    for m in enumerate_basis(fields, max_letters, int(h)):
        if multitrace_weight(m) == h and multitrace_ghost(m) == g:
            out.append(m)
    return out


def sector_is_complete(sector_elems: Sequence[MultiTrace], max_letters: int, max_deriv: int) -> bool:
    return all(multitrace_letters(m) <= max_letters and _max_deriv(m) <= max_deriv for m in sector_elems)


@dataclass
class CohomologyTable:
    dims: Dict[Sector, int] = field(default_factory=dict)
    sizes: Dict[Sector, int] = field(default_factory=dict)
    ranks: Dict[Sector, int] = field(default_factory=dict)  # rank of Q leaving the sector
    n: Optional[Fraction] = None

    def by_ghost(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for (_, g), d in self.dims.items():
            out[g] = out.get(g, 0) + d
        return dict(sorted(out.items()))

    def rows(self) -> List[Tuple[Fraction, int, int, int]]:
        return [(h, g, self.sizes[(h, g)], self.dims[(h, g)]) for (h, g) in sorted(self.dims)]


def _matrix(brst: BRST, source: Sequence[MultiTrace]):
    """Sparse rows Q(x) for x in source, with hbar set to 1, plus the column count."""
    cols: Dict[MultiTrace, int] = {}
    rows = []
    for m in source:
        qx = brst.Q(OperatorSum({m: GradedCoefficient.const(1)}))
        row = {}
        for mt, c in qx.terms.items():
            c = specialize_hbar(c, 1)
            if c:
                row[cols.setdefault(mt, len(cols))] = c
        rows.append(row)
    return rows, len(cols)


def _rank(rows, ncols: int, n: Optional[Fraction]) -> int:
    return rank_generic(rows, ncols) if n is None else rank_at(rows, ncols, n)


def candidate_sectors(spec: CyclicAlgebraSpec, max_letters: int) -> List[Sector]:
    """(h, g) pairs with 2h - g <= max_letters and |g| within reach of the field ghosts."""
    ghosts = [f.ghost for f in spec.fields()]
    lo, hi = min(min(ghosts), 0) * max_letters, max(max(ghosts), 0) * max_letters
    out = []
    for h2 in range(0, 2 * max_letters + 1):
        h = Fraction(h2, 2)
        for g in range(lo, hi + 1):
            if 2 * h - g <= max_letters:
                out.append((h, g))
    return out


def cohomology_dimensions(
    spec: CyclicAlgebraSpec,
    max_letters: int,
    max_deriv: int,
    n: Optional[Fraction] = None,
    sectors: Optional[Iterable[Sector]] = None,
    include_unit: bool = True,
) -> CohomologyTable:
    """dim H at every (weight, ghost) sector computable inside the truncation.

    H at (h, g) needs the sectors (h, g) and (h, g+1) to be complete, since
    Q maps (h, g+1) -> (h, g) -> (h, g-1).  Asking for a sector that does not
    fit raises :class:`RefusalError`, as does a current with J(z)J(w) != 0.
    ``n=None`` computes ranks over Q(N); otherwise N is set to ``n``.
    hbar is set to 1 throughout.
    """
    brst = BRST(spec)
    if not brst.jj().is_zero():
        raise RefusalError("J(z)J(w) has singular terms, so Q^2 != 0 and there is no cohomology")
    jg = {multitrace_ghost(m) for m in brst.J.terms}
    jw = {multitrace_weight(m) for m in brst.J.terms}
    if jg != {-1} or jw != {1}:
        raise RefusalError(f"current must have ghost -1 and weight 1, got {jg} and {jw}")
    fields = brst.fields
    cache: Dict[Sector, List[MultiTrace]] = {}

    def elems(s: Sector) -> List[MultiTrace]:
        if s not in cache:
            xs = sector_basis(fields, s[0], s[1])
            cache[s] = xs if include_unit else [m for m in xs if m]
        return cache[s]

    def complete(s: Sector) -> bool:
        return 2 * s[0] - s[1] <= max_letters and sector_is_complete(elems(s), max_letters, max_deriv)

    requested = list(sectors) if sectors is not None else None
    todo = requested if requested is not None else candidate_sectors(spec, max_letters)
    table = CohomologyTable(n=None if n is None else Fraction(n))
    ranks: Dict[Sector, int] = {}

    def rank_out(s: Sector) -> int:
        if s not in ranks:
            src = elems(s)
            rows, ncols = _matrix(brst, src)
            ranks[s] = _rank(rows, ncols, table.n)
        return ranks[s]

    for s in todo:
        h, g = Fraction(s[0]), int(s[1])
        s = (h, g)
        up = (h, g + 1)
        ok = complete(s) and complete(up)
        if not ok:
            if requested is not None:
                raise RefusalError(f"sector (h={h}, g={g}) is not Q-stable inside letters<={max_letters}, deriv<={max_deriv}")
            continue
        size = len(elems(s))
        if size == 0:
            continue
        table.sizes[s] = size
        table.ranks[s] = rank_out(s)
        table.dims[s] = size - table.ranks[s] - rank_out(up)
    return table
