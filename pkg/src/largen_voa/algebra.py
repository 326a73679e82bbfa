"""Finite-dimensional graded algebras with an invariant trace.

Such an algebra supplies everything the BRST construction needs: one
matrix-valued field per basis element, the pairing that governs contractions,
and the structure constants that build the BRST current.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

from .linalg import matrix_inverse, nullspace
from .operators import FieldSymbol

Vector = Tuple[Fraction, ...]


class AlgebraSpecError(ValueError):
    """The algebra data is inconsistent (degenerate pairing, broken symmetry, ...)."""


@dataclass(frozen=True)
class CyclicAlgebraSpec:
    name: str
    basis: Tuple[Tuple[str, int], ...]
    unit: int
    m2: Mapping[Tuple[int, int], Vector]
    trace: Vector
    field_names: Tuple[str, ...]
    higher: Mapping[int, Mapping[Tuple[int, ...], Vector]] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def degree(self, i: int) -> int:
        return self.basis[i][1]

    def parity(self, i: int) -> int:
        return self.basis[i][1] & 1

    def mul(self, i: int, j: int) -> Vector:
        return self.m2.get((i, j), (Fraction(0),) * self.dim)

    def mul_vectors(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> List[Fraction]:
        out = [Fraction(0)] * self.dim
        for i, ui in enumerate(u):
            if not ui:
                continue
            for j, vj in enumerate(v):
                if not vj:
                    continue
                for k, c in enumerate(self.mul(i, j)):
                    if c:
                        out[k] += ui * vj * c
        return out

    def tr(self, v: Sequence[Fraction]) -> Fraction:
        return sum((a * b for a, b in zip(v, self.trace)), Fraction(0))

    def gram(self) -> List[List[Fraction]]:
        """G[i][j] = tr(e_i e_j)."""
        return [[self.tr(self.mul(i, j)) for j in range(self.dim)] for i in range(self.dim)]

    def fields(self) -> List[FieldSymbol]:
        """One field per basis element, ghost number = degree - 1."""
        return [FieldSymbol(self.field_names[i], self.degree(i) - 1) for i in range(self.dim)]

    def field_map(self) -> Dict[str, FieldSymbol]:
        return {f.name: f for f in self.fields()}

    def field_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.field_names)}

    # -- validation --------------------------------------------------------
    def validate(self) -> None:
        n = self.dim
        if len(self.field_names) != n or len(set(self.field_names)) != n:
            raise AlgebraSpecError("need one distinct field name per basis element")
        if len(self.trace) != n:
            raise AlgebraSpecError("trace vector has the wrong length")
        for (i, j), v in self.m2.items():
            if len(v) != n:
                raise AlgebraSpecError(f"product e{i}*e{j} has the wrong length")
            for k, c in enumerate(v):
                if c and self.degree(k) != self.degree(i) + self.degree(j):
                    raise AlgebraSpecError(f"product e{i}*e{j} is not homogeneous")
        e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for i in range(n):
            if list(self.mul(self.unit, i)) != e[i] or list(self.mul(i, self.unit)) != e[i]:
                raise AlgebraSpecError(f"basis element {self.unit} is not a two-sided unit")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    left = self.mul_vectors(self.mul(i, j), e[k])
                    right = self.mul_vectors(e[i], self.mul(j, k))
                    if left != right:
                        raise AlgebraSpecError(f"product is not associative on ({i},{j},{k})")
        g = self.gram()
        for i in range(n):
            for j in range(n):
                sign = -1 if self.parity(i) and self.parity(j) else 1
                if g[i][j] != sign * g[j][i]:
                    raise AlgebraSpecError(f"trace pairing is not graded-symmetric on ({i},{j})")
        kernel = nullspace(g)
        if kernel:
            raise AlgebraSpecError(f"trace pairing is degenerate; kernel vector {kernel[0]}")


class PairingTable:
    """omega[(X, Y)] is the coefficient of the simple pole in X(z) Y(w)."""

    __slots__ = ("omega", "_key")

    def __init__(self, omega: Mapping[Tuple[str, str], Fraction]):
        self.omega: Dict[Tuple[str, str], Fraction] = {k: Fraction(v) for k, v in omega.items() if v}
        self._key = frozenset(self.omega.items())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PairingTable) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"PairingTable({self.omega!r})"

    def __call__(self, x: str, y: str) -> Fraction:
        return self.omega.get((x, y), Fraction(0))

    def partners(self, x: str) -> List[str]:
        return [b for (a, b), v in self.omega.items() if a == x and v]


def pairing_inverse(spec: CyclicAlgebraSpec) -> Tuple[PairingTable, List[FieldSymbol], List[List[Fraction]]]:
    """Invert the trace pairing and build the contraction table.

    Returns (table, fields, eta) with eta = G^{-1}, so that
    sum_i (a, e_i) eta^{ij} e_j = a.  The simple-pole coefficient of
    phi^i(z) phi^j(w) is eta^{ij}.
    """
    g = spec.gram()
    kernel = nullspace(g)
    if kernel:
        raise AlgebraSpecError(f"trace pairing is degenerate; kernel vector {kernel[0]}")
    eta = matrix_inverse(g)
    fields = spec.fields()
    omega = {}
    for i in range(spec.dim):
        for j in range(spec.dim):
            if eta[i][j]:
                omega[(fields[i].name, fields[j].name)] = eta[i][j]
    return PairingTable(omega), fields, eta


# ---------------------------------------------------------------------------
# bundled models and file loading


def _vec(n: int, entries: Mapping[int, int]) -> Vector:
    return tuple(Fraction(entries.get(k, 0)) for k in range(n))


def eps2() -> CyclicAlgebraSpec:
    """Exterior algebra on two generators of degree 1; trace picks the top class."""
    n = 4  # 1, e1, e2, e1e2
    m2 = {}
    for i in range(n):
        m2[(0, i)] = _vec(n, {i: 1})
        m2[(i, 0)] = _vec(n, {i: 1})
    m2[(1, 2)] = _vec(n, {3: 1})
    m2[(2, 1)] = _vec(n, {3: -1})
    return CyclicAlgebraSpec(
        name="eps2",
        basis=(("1", 0), ("e1", 1), ("e2", 1), ("e1e2", 2)),
        unit=0,
        m2=m2,
        trace=_vec(n, {3: 1}),
        field_names=("c", "Z1", "Z2", "b"),
    )


def dual_numbers_deg2() -> CyclicAlgebraSpec:
    """C[x]/(x^2) with x in degree 2 and trace(x) = 1."""
    n = 2
    m2 = {(0, 0): _vec(n, {0: 1}), (0, 1): _vec(n, {1: 1}), (1, 0): _vec(n, {1: 1})}
    return CyclicAlgebraSpec(
        name="dual-numbers-deg2",
        basis=(("1", 0), ("x", 2)),
        unit=0,
        m2=m2,
        trace=_vec(n, {1: 1}),
        field_names=("c", "b"),
    )


BUILTIN_MODELS = {"eps2": eps2, "dual-numbers-deg2": dual_numbers_deg2}


def spec_from_dict(data: Mapping) -> CyclicAlgebraSpec:
    """Build a spec from ``{basis:[{name,degree,field?}], unit, m2:[[i,j,[coeffs]]], trace:[...]}``.

    ``unit`` and the indices in ``m2`` may be basis names or integer positions.
    """
    basis = tuple((str(b["name"]), int(b["degree"])) for b in data["basis"])
    n = len(basis)
    names = {name: i for i, (name, _) in enumerate(basis)}

    def index(x) -> int:
        if isinstance(x, int):
            return x
        if x in names:
            return names[x]
        raise AlgebraSpecError(f"unknown basis element {x!r}")

    m2 = {}
    for entry in data.get("m2", []):
        i, j, coeffs = entry
        if len(coeffs) != n:
            raise AlgebraSpecError(f"m2 entry for ({i},{j}) needs {n} coefficients")
        m2[(index(i), index(j))] = tuple(Fraction(c) for c in coeffs)
    unit = index(data.get("unit", 0))
    for i in range(n):
        m2.setdefault((unit, i), _vec(n, {i: 1}))
        m2.setdefault((i, unit), _vec(n, {i: 1}))
    trace = tuple(Fraction(t) for t in data["trace"])
    default_names = [f"phi{i}" for i in range(n)]
    field_names = tuple(str(b.get("field", default_names[i])) for i, b in enumerate(data["basis"]))
    spec = CyclicAlgebraSpec(
        name=str(data.get("name", "custom")),
        basis=basis,
        unit=unit,
        m2=m2,
        trace=trace,
        field_names=field_names,
    )
    spec.validate()
    return spec


def load_model(name_or_path: str) -> CyclicAlgebraSpec:
    if name_or_path in BUILTIN_MODELS:
        return BUILTIN_MODELS[name_or_path]()
    path = Path(name_or_path)
    if not path.exists():
        raise AlgebraSpecError(
            f"unknown model {name_or_path!r}; builtins are {', '.join(BUILTIN_MODELS)}"
        )
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".toml":
        try:
            import tomllib  # type: ignore[import-not-found]
        except ImportError:  # Python 3.10
            import tomli as tomllib

        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    return spec_from_dict(data)
