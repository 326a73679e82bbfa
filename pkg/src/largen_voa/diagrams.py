"""Walled-Brauer diagrams: the skeleton of the Deligne category Rep(GL_N).

Objects are words in two colours, ``B`` (filled, the vector representation)
and ``W`` (hollow, its dual).  A diagram from ``top`` to ``bottom`` is a
perfect matching on the vertices of both rows such that an edge inside one
row joins opposite colours and an edge between the rows joins equal colours.

Vertices are numbered ``0 .. len(top)-1`` for the top row followed by
``len(top) .. len(top)+len(bottom)-1`` for the bottom row.  A diagram is a
morphism ``top -> bottom``; composing ``y`` after ``x`` glues the bottom row of
``x`` to the top row of ``y`` and counts the closed loops that disappear.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

from .scalars import GradedCoefficient, N, ONE

BLACK = "B"
WHITE = "W"
_SYMBOLS = {BLACK: "●", WHITE: "○"}

Word = Tuple[str, ...]
Edge = Tuple[int, int]


class ShapeError(ValueError):
    """Words of two morphisms do not match, or a matching breaks the colour rule."""


def word(spec: str | Sequence[str]) -> Word:
    """Build a word from ``"BWBW"`` or a sequence of colours.

    The glyphs used in print (filled/hollow circles) are accepted as well.
    """
    out = []
    for ch in spec:
        if ch in (BLACK, "●", "b", "*"):
            out.append(BLACK)
        elif ch in (WHITE, "○", "w", "o"):
            out.append(WHITE)
        elif ch.isspace() or ch == ",":
            continue
        else:
            raise ShapeError(f"unknown colour {ch!r}")
    return tuple(out)


def standard_word(r: int, s: int) -> Word:
    """The word [r, s]: r black letters followed by s white letters."""
    return (BLACK,) * r + (WHITE,) * s


def dual_word(w: Sequence[str]) -> Word:
    return tuple(WHITE if c == BLACK else BLACK for c in w)


def words_isomorphic(w1: Sequence[str], w2: Sequence[str]) -> bool:
    return w1.count(BLACK) == w2.count(BLACK) and w1.count(WHITE) == w2.count(WHITE)


def format_word(w: Sequence[str]) -> str:
    return "".join(_SYMBOLS[c] for c in w)


@dataclass(frozen=True)
class Diagram:
    top: Word
    bottom: Word
    edges: Tuple[Edge, ...]

    def __post_init__(self) -> None:
        n = len(self.top) + len(self.bottom)
        edges = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        seen = [p for e in edges for p in e]
        if sorted(seen) != list(range(n)):
            raise ShapeError("edges must form a perfect matching of all vertices")
        for i, j in edges:
            if self._row(i) == self._row(j):
                ok = self._colour(i) != self._colour(j)
            else:
                ok = self._colour(i) == self._colour(j)
            if not ok:
                raise ShapeError(f"edge {self._label(i)}-{self._label(j)} breaks the colour rule")
        object.__setattr__(self, "edges", edges)

    def _row(self, v: int) -> int:
        return 0 if v < len(self.top) else 1

    def _colour(self, v: int) -> str:
        return self.top[v] if v < len(self.top) else self.bottom[v - len(self.top)]

    def _label(self, v: int) -> str:
        return f"t{v + 1}" if v < len(self.top) else f"b{v - len(self.top) + 1}"

    def partner(self) -> List[int]:
        out = [0] * (len(self.top) + len(self.bottom))
        for i, j in self.edges:
            out[i] = j
            out[j] = i
        return out

    def to_text(self) -> str:
        return ", ".join(f"{self._label(i)}-{self._label(j)}" for i, j in self.edges)

    def to_json(self) -> dict:
        return {
            "top": "".join(self.top),
            "bottom": "".join(self.bottom),
            "edges": [[self._label(i), self._label(j)] for i, j in self.edges],
        }

    def __str__(self) -> str:
        return f"[{format_word(self.top)} -> {format_word(self.bottom)}: {self.to_text()}]"


_EDGE_RE = re.compile(r"^\s*([tb])(\d+)\s*-\s*([tb])(\d+)\s*$")


def parse_diagram(text: str, top: Sequence[str], bottom: Sequence[str]) -> Diagram:
    """Parse ``"t1-b3, t2-t4, b1-b2"`` (1-based indices per row)."""
    top, bottom = word(top), word(bottom)
    edges = []
    if text.strip():
        for chunk in text.split(","):
            m = _EDGE_RE.match(chunk)
            if not m:
                raise ShapeError(f"cannot parse edge {chunk.strip()!r}")
            ends = []
            for row, idx in ((m.group(1), int(m.group(2))), (m.group(3), int(m.group(4)))):
                size = len(top) if row == "t" else len(bottom)
                if not 1 <= idx <= size:
                    raise ShapeError(f"vertex {row}{idx} out of range")
                ends.append(idx - 1 if row == "t" else len(top) + idx - 1)
            edges.append(tuple(ends))
    return Diagram(top, bottom, tuple(edges))


# ---------------------------------------------------------------------------
# composition


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry


def _glue(x: Diagram, y: Diagram) -> Tuple[Diagram, int]:
    """Stack ``y`` below ``x`` (``x: w -> w'``, ``y: w' -> w''``); return (diagram, loops)."""
    if x.bottom != y.top:
        raise ShapeError(
            f"cannot compose: {format_word(x.bottom)} does not match {format_word(y.top)}"
        )
    a, m, c = len(x.top), len(x.bottom), len(y.bottom)
    # glued vertex ids: x.top -> [0, a), middle -> [a, a+m), y.bottom -> [a+m, a+m+c)
    uf = _UnionFind(a + m + c)
    for i, j in x.edges:
        uf.union(i, j)
    for i, j in y.edges:
        # y numbers its top row (the middle) first
        uf.union(a + i, a + j)
    outer: Dict[int, List[int]] = {}
    for v in list(range(a)) + list(range(a + m, a + m + c)):
        outer.setdefault(uf.find(v), []).append(v)
    touched = set(outer)
    loops = len({uf.find(v) for v in range(a, a + m)} - touched)
    edges = []
    for verts in outer.values():
        i, j = verts
        edges.append((i if i < a else i - m, j if j < a else j - m))
    return Diagram(x.top, y.bottom, tuple(edges)), loops


def loops_by_walking(x: Diagram, y: Diagram) -> int:
    """Count closed loops of a composite by walking cycles (independent of union-find)."""
    if x.bottom != y.top:
        raise ShapeError("word mismatch")
    a, m = len(x.top), len(x.bottom)
    px, py = x.partner(), y.partner()
    visited = [False] * m
    # middle vertices reached from an outer vertex lie on open strands
    starts = [("x", v) for v in range(a)] + [("y", m + k) for k in range(len(y.bottom))]
    for side, v in starts:
        while True:
            if side == "x":
                v = px[v]
                if v < a:
                    break
                v -= a
                visited[v] = True
                side = "y"
            else:
                v = py[v]
                if v >= m:
                    break
                visited[v] = True
                side, v = "x", a + v
    loops = 0
    for s in range(m):
        if visited[s]:
            continue
        loops += 1
        v = s
        while not visited[v]:
            visited[v] = True
            v = px[a + v] - a  # along x back to the middle
            visited[v] = True
            v = py[v]
    return loops


def compose(top: "DiagramSum | Diagram", bottom: "DiagramSum | Diagram") -> "DiagramSum":
    """``top ∘ bottom``: apply ``bottom`` first, then ``top``.

    Each removed closed loop contributes a factor N.
    """
    top_sum = DiagramSum.of(top)
    bottom_sum = DiagramSum.of(bottom)
    out: Dict[Diagram, GradedCoefficient] = {}
    for dx, cx in bottom_sum.terms.items():
        for dy, cy in top_sum.terms.items():
            glued, loops = _glue(dx, dy)
            coeff = cx * cy * N**loops
            out[glued] = out.get(glued, GradedCoefficient()) + coeff
    return DiagramSum(out)


def tensor(x: Diagram, y: Diagram) -> Diagram:
    """Place ``x`` to the left of ``y``."""
    ax, bx = len(x.top), len(x.bottom)
    ay = len(y.top)

    def shift_x(v: int) -> int:
        return v if v < ax else v + ay

    def shift_y(v: int) -> int:
        return v + ax if v < ay else v + ax + bx

    edges = [(shift_x(i), shift_x(j)) for i, j in x.edges]
    edges += [(shift_y(i), shift_y(j)) for i, j in y.edges]
    return Diagram(x.top + y.top, x.bottom + y.bottom, tuple(edges))


# ---------------------------------------------------------------------------
# structural morphisms


def identity(w: Sequence[str]) -> Diagram:
    w = word(w)
    n = len(w)
    return Diagram(w, w, tuple((i, n + i) for i in range(n)))


def braiding(w1: Sequence[str], w2: Sequence[str]) -> Diagram:
    """w1 ⊗ w2 -> w2 ⊗ w1, each letter going to its copy."""
    w1, w2 = word(w1), word(w2)
    n1, n2 = len(w1), len(w2)
    n = n1 + n2
    edges = [(i, n + n2 + i) for i in range(n1)]
    edges += [(n1 + j, n + j) for j in range(n2)]
    return Diagram(w1 + w2, w2 + w1, tuple(edges))


def ev(w: Sequence[str]) -> Diagram:
    """w* ⊗ w -> 1, joining the i-th letters of w* and w."""
    w = word(w)
    n = len(w)
    return Diagram(dual_word(w) + w, (), tuple((i, n + i) for i in range(n)))


def coev(w: Sequence[str]) -> Diagram:
    """1 -> w ⊗ w*, joining the i-th letters of w and w*."""
    w = word(w)
    n = len(w)
    return Diagram((), w + dual_word(w), tuple((i, n + i) for i in range(n)))


def trace_diagram(n: int) -> Diagram:
    """1 -> ([1,1])^{⊗n}: the closed chain realising Tr(X_1 ... X_n).

    The white end of letter k meets the black end of letter k+1, and the
    white end of the last letter closes up on the first black.
    """
    if n < 1:
        raise ShapeError("trace needs at least one letter")
    bottom = (BLACK, WHITE) * n
    edges = [(2 * k + 1, (2 * k + 2) % (2 * n)) for k in range(n)]
    return Diagram((), bottom, tuple(edges))


def pairing_cap() -> Diagram:
    """[1,1] ⊗ [1,1] -> 1: black of the first letter to white of the second and vice versa."""
    return Diagram((BLACK, WHITE, BLACK, WHITE), (), ((0, 3), (1, 2)))


def structural_diagram(kind: str, *args) -> Diagram:
    table = {
        "identity": identity,
        "braiding": braiding,
        "ev": ev,
        "coev": coev,
        "trace": trace_diagram,
    }
    try:
        return table[kind](*args)
    except KeyError:
        raise ShapeError(f"unknown structural diagram {kind!r}") from None


# ---------------------------------------------------------------------------
# counting and enumeration


def count_diagrams(top: Sequence[str], bottom: Sequence[str]) -> int:
    """Number of (top, bottom) diagrams.

    Every edge joins a vertex of {top blacks, bottom whites} to one of
    {top whites, bottom blacks}, and any such bijection is allowed.
    """
    top, bottom = word(top), word(bottom)
    left = top.count(BLACK) + bottom.count(WHITE)
    right = top.count(WHITE) + bottom.count(BLACK)
    return math.factorial(left) if left == right else 0


def enumerate_diagrams(top: Sequence[str], bottom: Sequence[str]) -> Iterator[Diagram]:
    """Brute-force enumeration of every valid matching."""
    top, bottom = word(top), word(bottom)
    n = len(top) + len(bottom)
    colours = list(top) + list(bottom)
    rows = [0] * len(top) + [1] * len(bottom)

    def allowed(i: int, j: int) -> bool:
        same_row = rows[i] == rows[j]
        same_colour = colours[i] == colours[j]
        return same_row != same_colour

    def rec(free: List[int], acc: List[Edge]) -> Iterator[Tuple[Edge, ...]]:
        if not free:
            yield tuple(acc)
            return
        i = free[0]
        for k in range(1, len(free)):
            j = free[k]
            if allowed(i, j):
                acc.append((i, j))
                yield from rec(free[1:k] + free[k + 1 :], acc)
                acc.pop()

    if n % 2:
        return
    for edges in rec(list(range(n)), []):
        yield Diagram(top, bottom, edges)


# ---------------------------------------------------------------------------
# linear combinations


class DiagramSum:
    """Z[N]-linear combination of diagrams sharing one source and one target."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Diagram, GradedCoefficient] | None = None):
        clean = {d: c for d, c in (terms or {}).items() if not c.is_zero()}
        for c in clean.values():
            if c.has_variable(0) or c.has_variable(1) or c.has_variable(3):
                raise ValueError("diagram coefficients must be polynomials in N only")
        shapes = {(d.top, d.bottom) for d in clean}
        if len(shapes) > 1:
            raise ShapeError("all diagrams in a sum must share source and target words")
        self.terms: Dict[Diagram, GradedCoefficient] = clean

    @classmethod
    def of(cls, x: "DiagramSum | Diagram") -> "DiagramSum":
        if isinstance(x, DiagramSum):
            return x
        return cls({x: ONE})

    def __add__(self, other: "DiagramSum | Diagram") -> "DiagramSum":
        other = DiagramSum.of(other)
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, GradedCoefficient()) + c
        return DiagramSum(out)

    def scale(self, c: GradedCoefficient | int) -> "DiagramSum":
        if not isinstance(c, GradedCoefficient):
            c = GradedCoefficient.const(c)
        return DiagramSum({d: v * c for d, v in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Diagram):
            other = DiagramSum.of(other)
        if not isinstance(other, DiagramSum):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "DiagramSum(0)"
        parts = [f"({c})*{d}" for d, c in sorted(self.terms.items(), key=lambda kv: kv[0].edges)]
        return "DiagramSum(" + " + ".join(parts) + ")"
