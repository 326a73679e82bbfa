"""Invariant operators: signed cyclic trace words and graded products of traces.

A letter is ``∂^k φ`` for a matrix-valued field ``φ``.  A trace is stored as
its lexicographically least rotation, a multi-trace as a sorted tuple of
traces, and an :class:`OperatorSum` as a sparse map from multi-traces to
:class:`~largen_voa.scalars.GradedCoefficient`.  Koszul signs produced while
canonicalizing are moved into the coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .scalars import GradedCoefficient


@dataclass(frozen=True, order=True)
class FieldSymbol:
    name: str
    ghost: int

    @property
    def parity(self) -> int:
        return self.ghost % 2


class Letter(NamedTuple):
    """``∂^deriv`` applied to a field; the ghost number travels with the letter.

    Tuple order is (name, deriv, ghost), i.e. the global (field, deriv) order.
    """

    name: str
    deriv: int
    ghost: int

    @property
    def parity(self) -> int:
        return self.ghost & 1

    @property
    def field(self) -> FieldSymbol:
        return FieldSymbol(self.name, self.ghost)

    def raised(self, k: int = 1) -> "Letter":
        return Letter(self.name, self.deriv + k, self.ghost)

    def __str__(self) -> str:
        if self.deriv == 0:
            return self.name
        return f"d^{self.deriv} {self.name}"


def letter(field: FieldSymbol, deriv: int = 0) -> Letter:
    if deriv < 0:
        raise ValueError("derivative order must be >= 0")
    return Letter(field.name, deriv, field.ghost)


TraceWord = Tuple[Letter, ...]
MultiTrace = Tuple[TraceWord, ...]
UNIT: MultiTrace = ()


def trace_parity(t: TraceWord) -> int:
    return sum(x.ghost for x in t) & 1


def multitrace_ghost(m: MultiTrace) -> int:
    return sum(x.ghost for t in m for x in t)


def multitrace_letters(m: MultiTrace) -> int:
    return sum(len(t) for t in m)


def multitrace_weight2(m: MultiTrace) -> int:
    """Twice the conformal weight, counting ghost+1 per field and 2 per derivative."""
    return sum(x.ghost + 1 + 2 * x.deriv for t in m for x in t)


def trace_key(t: TraceWord) -> tuple:
    return (len(t), t)


# ---------------------------------------------------------------------------
# canonical forms


@lru_cache(maxsize=None)
def canonicalize_trace(letters: TraceWord) -> Optional[Tuple[int, TraceWord]]:
    """Least rotation of a cyclic word with its Koszul sign, or ``None`` if the trace vanishes.

    Rotating the first k letters to the back costs (-1)^(P(front) * P(back))
    where P is the total parity of a block.
    """
    letters = tuple(letters)
    n = len(letters)
    if n == 0:
        raise ValueError("a trace needs at least one letter")
    par = [x.ghost & 1 for x in letters]
    prefix = [0]
    for p in par:
        prefix.append(prefix[-1] + p)
    total = prefix[-1]
    best = letters
    best_sign = 1
    for k in range(1, n):
        rot = letters[k:] + letters[:k]
        front = prefix[k] & 1
        sign = -1 if front and (total - prefix[k]) & 1 else 1
        if rot == letters:
            if sign == -1:
                return None
            continue
        if rot < best:
            best, best_sign = rot, sign
    return best_sign, best


def normalize_multitrace(ts: Iterable[Tuple[int, TraceWord]]) -> Optional[Tuple[int, MultiTrace]]:
    """Sort traces into canonical order, tracking the Koszul sign of odd traces.

    Inputs must already be canonical traces.  ``None`` means the product is zero.
    """
    sign = 1
    items: List[TraceWord] = []
    for s, t in ts:
        sign *= s
        items.append(t)
    # insertion sort so each swap of two odd traces flips the sign
    for i in range(1, len(items)):
        j = i
        cur = items[i]
        cur_key = trace_key(cur)
        cur_odd = trace_parity(cur)
        while j > 0 and trace_key(items[j - 1]) > cur_key:
            if cur_odd and trace_parity(items[j - 1]):
                sign = -sign
            items[j] = items[j - 1]
            j -= 1
        items[j] = cur
    for a, b in zip(items, items[1:]):
        if a == b and trace_parity(a):
            return None
    return sign, tuple(items)


def canonical_product(traces: Iterable[TraceWord]) -> Optional[Tuple[int, MultiTrace]]:
    """Canonicalize each raw trace then the product; ``None`` if it vanishes."""
    pieces = []
    for t in traces:
        c = canonicalize_trace(tuple(t))
        if c is None:
            return None
        pieces.append(c)
    return normalize_multitrace(pieces)


def merge_multitraces(a: MultiTrace, b: MultiTrace) -> Optional[Tuple[int, MultiTrace]]:
    return normalize_multitrace([(1, t) for t in a + b])


# ---------------------------------------------------------------------------
# linear combinations


def _coeff(x) -> GradedCoefficient:
    return x if isinstance(x, GradedCoefficient) else GradedCoefficient.const(x)


class OperatorSum:
    """Sparse linear combination of canonical multi-traces."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[MultiTrace, GradedCoefficient] | None = None):
        self.terms: Dict[MultiTrace, GradedCoefficient] = {
            m: c for m, c in (terms or {}).items() if not c.is_zero()
        }

    # -- constructors -----------------------------------------------------
    @classmethod
    def unit(cls, coeff=1) -> "OperatorSum":
        return cls({UNIT: _coeff(coeff)})

    @classmethod
    def from_traces(cls, traces: Sequence[Sequence[Letter]], coeff=1) -> "OperatorSum":
        """Product of raw traces, canonicalized."""
        res = canonical_product(tuple(t) for t in traces)
        if res is None:
            return cls()
        sign, m = res
        return cls({m: _coeff(coeff) * sign})

    @classmethod
    def trace(cls, *letters: Letter, coeff=1) -> "OperatorSum":
        return cls.from_traces([letters], coeff)

    # -- linear structure -------------------------------------------------
    def copy(self) -> "OperatorSum":
        return OperatorSum(dict(self.terms))

    def add_term(self, m: MultiTrace, c: GradedCoefficient) -> None:
        """In-place accumulation (used by builders before the sum is shared)."""
        new = self.terms.get(m)
        new = c if new is None else new + c
        if new.is_zero():
            self.terms.pop(m, None)
        else:
            self.terms[m] = new

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        out = self.copy()
        for m, c in other.terms.items():
            out.add_term(m, c)
        return out

    def __neg__(self) -> "OperatorSum":
        return OperatorSum({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + (-other)

    def scale(self, c) -> "OperatorSum":
        c = _coeff(c)
        if c.is_zero():
            return OperatorSum()
        return OperatorSum({m: v * c for m, v in self.terms.items()})

    def __rmul__(self, c) -> "OperatorSum":
        return self.scale(c)

    def __mul__(self, other):
        if isinstance(other, OperatorSum):
            return self.product(other)
        return self.scale(other)

    def product(self, other: "OperatorSum") -> "OperatorSum":
        """Graded-commutative product of multi-traces (concatenation)."""
        out = OperatorSum()
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                res = merge_multitraces(m1, m2)
                if res is not None:
                    out.add_term(res[1], c1 * c2 * res[0])
        return out

    def map_coefficients(self, fn) -> "OperatorSum":
        return OperatorSum({m: fn(c) for m, c in self.terms.items()})

    # -- queries ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def sorted_items(self) -> List[Tuple[MultiTrace, GradedCoefficient]]:
        return sorted(self.terms.items(), key=lambda kv: multitrace_key(kv[0]))

    def ghosts(self) -> set:
        return {multitrace_ghost(m) for m in self.terms}

    def parity(self) -> int:
        """Parity of a homogeneous sum; raises if mixed."""
        ps = {g & 1 for g in self.ghosts()}
        if len(ps) > 1:
            raise ValueError("operator sum is not homogeneous in parity")
        return ps.pop() if ps else 0

    def __repr__(self) -> str:
        from .render import operator_to_text

        return f"OperatorSum({operator_to_text(self)!r})"

    def __str__(self) -> str:
        from .render import operator_to_text

        return operator_to_text(self)


def multitrace_key(m: MultiTrace) -> tuple:
    return (multitrace_letters(m), len(m), tuple(trace_key(t) for t in m))


# ---------------------------------------------------------------------------
# derivative


@lru_cache(maxsize=None)
def _derivative_multitrace(m: MultiTrace) -> Tuple[Tuple[MultiTrace, int], ...]:
    acc: Dict[MultiTrace, int] = {}
    for ti, t in enumerate(m):
        for li in range(len(t)):
            new_t = t[:li] + (t[li].raised(),) + t[li + 1 :]
            res = canonical_product(m[:ti] + (new_t,) + m[ti + 1 :])
            if res is not None:
                acc[res[1]] = acc.get(res[1], 0) + res[0]
    return tuple((k, v) for k, v in acc.items() if v)


def derivative(x: OperatorSum, times: int = 1) -> OperatorSum:
    """Translation operator: Leibniz rule over every letter."""
    for _ in range(times):
        out = OperatorSum()
        for m, c in x.terms.items():
            for m2, s in _derivative_multitrace(m):
                out.add_term(m2, c * s)
        x = out
    return x


# ---------------------------------------------------------------------------
# basis enumeration


def _necklaces(alphabet: Sequence[Letter], n: int) -> Iterator[TraceWord]:
    """Words of length n that are least among their rotations (FKM algorithm)."""
    k = len(alphabet)
    if k == 0:
        return
    a = [0] * (n + 1)

    def gen(t: int, p: int) -> Iterator[TraceWord]:
        if t > n:
            if n % p == 0:
                yield tuple(alphabet[i] for i in a[1:])
            return
        a[t] = a[t - p]
        yield from gen(t + 1, p)
        for j in range(a[t - p] + 1, k):
            a[t] = j
            yield from gen(t + 1, t)

    yield from gen(1, 1)


def letter_alphabet(fields: Sequence[FieldSymbol], max_deriv: int) -> List[Letter]:
    return sorted(letter(f, k) for f in fields for k in range(max_deriv + 1))


def enumerate_traces(fields: Sequence[FieldSymbol], max_letters: int, max_deriv: int) -> List[TraceWord]:
    """Nonzero canonical single traces, ordered by (length, letters)."""
    alphabet = letter_alphabet(fields, max_deriv)
    out = []
    for n in range(1, max_letters + 1):
        for w in _necklaces(alphabet, n):
            if canonicalize_trace(w) is not None:
                out.append(w)
    return out


def enumerate_basis(fields: Sequence[FieldSymbol], max_letters: int, max_deriv: int) -> List[MultiTrace]:
    """All nonzero canonical multi-traces (the unit excluded) within the bounds."""
    if max_letters < 0 or max_deriv < 0:
        raise ValueError("bounds must be non-negative")
    traces = enumerate_traces(fields, max_letters, max_deriv)
    out: List[MultiTrace] = []

    def rec(start: int, budget: int, acc: List[TraceWord]) -> None:
        if acc:
            out.append(tuple(acc))
        for i in range(start, len(traces)):
            t = traces[i]
            if len(t) > budget:
                break
            if acc and acc[-1] == t and trace_parity(t):
                continue
            acc.append(t)
            # odd traces may not repeat, even ones may
            rec(i if not trace_parity(t) else i + 1, budget - len(t), acc)
            acc.pop()

    rec(0, max_letters, [])
    out.sort(key=multitrace_key)
    return out
