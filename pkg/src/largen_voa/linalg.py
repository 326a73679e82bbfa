"""Exact linear algebra over Q and Q[N], backed by sympy's DomainMatrix.

Ranks over Q(N) are computed by fraction-free row reduction over Q[N]
(``rref_den(method="FF")``), so no rational functions ever appear.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Sequence

from sympy import QQ, Symbol
from sympy.polys.matrices import DomainMatrix

from .scalars import GradedCoefficient

_N = Symbol("N")
_QQN = QQ[_N]


def _qq(x: Fraction):
    return QQ(x.numerator, x.denominator)


def _to_fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def _dm_rational(rows: Sequence[Sequence[Fraction]]) -> DomainMatrix:
    n = len(rows)
    m = len(rows[0]) if n else 0
    return DomainMatrix([[_qq(Fraction(v)) for v in r] for r in rows], (n, m), QQ)


def matrix_inverse(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    inv = _dm_rational(rows).inv()
    return [[_to_fraction(v) for v in r] for r in inv.to_list()]


def nullspace(rows: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    """Basis of {v : rows . v = 0}; empty when the matrix has full column rank."""
    if not rows:
        return []
    ns = _dm_rational(rows).nullspace()
    return [[_to_fraction(v) for v in r] for r in ns.to_list()]


def _poly_in_N(c: GradedCoefficient):
    """Convert a coefficient that only involves N into an element of Q[N]."""
    out = _QQN.zero
    for (a, b, cN, e), v in c.terms.items():
        if a or b or e:
            raise ValueError(f"coefficient {c} involves variables other than N")
        out += _QQN(_qq(v)) * _QQN(_N) ** cN
    return out


SparseMatrix = Sequence[Mapping[int, GradedCoefficient]]


def rank_generic(rows: SparseMatrix, ncols: int) -> int:
    """Rank over Q(N) of a matrix whose entries are polynomials in N."""
    if not rows or ncols == 0:
        return 0
    dense = [[_QQN.zero] * ncols for _ in rows]
    for i, r in enumerate(rows):
        for j, c in r.items():
            dense[i][j] = _poly_in_N(c)
    dm = DomainMatrix(dense, (len(rows), ncols), _QQN)
    _, _, pivots = dm.rref_den(method="FF")
    return len(pivots)


def rank_at(rows: SparseMatrix, ncols: int, n: Fraction) -> int:
    """Rank over Q after setting N = n."""
    if not rows or ncols == 0:
        return 0
    n = Fraction(n)
    dense: List[List[Fraction]] = [[Fraction(0)] * ncols for _ in rows]
    for i, r in enumerate(rows):
        for j, c in r.items():
            val = Fraction(0)
            for (a, b, cN, e), v in c.terms.items():
                if a or b or e:
                    raise ValueError(f"coefficient {c} involves variables other than N")
                val += v * n**cN
            dense[i][j] = val
    return _dm_rational(dense).rank()


def transpose_sparse(rows: SparseMatrix, ncols: int) -> List[Dict[int, GradedCoefficient]]:
    out: List[Dict[int, GradedCoefficient]] = [dict() for _ in range(ncols)]
    for i, r in enumerate(rows):
        for j, c in r.items():
            out[j][i] = c
    return out
