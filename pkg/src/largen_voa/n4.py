"""Small N=4 super-Virasoro generators of the eps2 model and a checker for their OPE table.

The expected table is the one stated for this model (hbar = 1):

    T T      ~ (-3N^2/2)/(z-w)^4 + 2T/(z-w)^2 + ∂T/(z-w)
    J+ J-    ~ (-N^2/2)/(z-w)^2 + 2 J0/(z-w)
    J0 J±    ~ ±J±/(z-w)
    J0 J0    ~ (-N^2/4)/(z-w)^2
    G+_i G-_j ~ -N^2/(z-w)^3 + 2 J_ij/(z-w)^2 + (-eps_ij T + ∂J_ij)/(z-w),   J_ij = Tr(Z_i Z_j)
    T G±_i   ~ (3/2) G±_i/(z-w)^2 + ∂G±_i/(z-w)
    G+ G+ ~ 0,  G- G- ~ 0

with eps_12 = -eps_21 = 1 and eps_ii = 0.  Every entry is compared exactly;
mismatches are reported, never patched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from .algebra import CyclicAlgebraSpec, eps2, pairing_inverse
from .brst import BRST, RefusalError
from .ope import OPEResult, singular_ope
from .operators import OperatorSum, derivative, letter
from .scalars import N, specialize_hbar

GENERATOR_NAMES = ("T", "J+", "J0", "J-", "G+1", "G+2", "G-1", "G-2")


def _is_eps2(spec: CyclicAlgebraSpec) -> bool:
    ref = eps2()
    return (
        spec.basis == ref.basis
        and spec.field_names == ref.field_names
        and spec.trace == ref.trace
        and all(spec.mul(i, j) == ref.mul(i, j) for i in range(4) for j in range(4))
    )


def n4_generators(spec: CyclicAlgebraSpec) -> Dict[str, OperatorSum]:
    if not _is_eps2(spec):
        raise RefusalError(f"the N=4 generators are defined for the eps2 model only, not {spec.name!r}")
    f = spec.field_map()
    c, z1, z2, b = (letter(f[n]) for n in ("c", "Z1", "Z2", "b"))
    tr = OperatorSum.trace
    half = Fraction(1, 2)
    T = tr(z1, z2.raised(), coeff=-half) + tr(z2, z1.raised(), coeff=half) - tr(b, c.raised())
    zs = {1: z1, 2: z2}
    out = {
        "T": T,
        "J+": tr(z1, z1, coeff=half),
        "J0": tr(z1, z2, coeff=-half),
        "J-": tr(z2, z2, coeff=-half),
    }
    for i in (1, 2):
        out[f"G+{i}"] = tr(b, zs[i])
        out[f"G-{i}"] = tr(c.raised(), zs[i])
    return out


def _at_hbar_one(x: OPEResult) -> OPEResult:
    return x.map(lambda op: op.map_coefficients(lambda c: specialize_hbar(c, 1)))


def _eps(i: int, j: int) -> int:
    return {(1, 2): 1, (2, 1): -1}.get((i, j), 0)


def expected_table(gens: Dict[str, OperatorSum]) -> Dict[Tuple[str, str], OPEResult]:
    T = gens["T"]
    n2 = OperatorSum.unit(N * N)
    exp: Dict[Tuple[str, str], OPEResult] = {
        ("T", "T"): OPEResult({4: n2.scale(Fraction(-3, 2)), 2: T.scale(2), 1: derivative(T)}),
        ("J+", "J-"): OPEResult({2: n2.scale(Fraction(-1, 2)), 1: gens["J0"].scale(2)}),
        ("J0", "J+"): OPEResult({1: gens["J+"]}),
        ("J0", "J-"): OPEResult({1: gens["J-"].scale(-1)}),
        ("J0", "J0"): OPEResult({2: n2.scale(Fraction(-1, 4))}),
    }
    fm = eps2().field_map()
    z = {1: letter(fm["Z1"]), 2: letter(fm["Z2"])}
    for i in (1, 2):
        for j in (1, 2):
            jij = OperatorSum.trace(z[i], z[j])
            exp[(f"G+{i}", f"G-{j}")] = OPEResult(
                {3: n2.scale(-1), 2: jij.scale(2), 1: T.scale(-_eps(i, j)) + derivative(jij)}
            )
            exp[(f"G+{i}", f"G+{j}")] = OPEResult()
            exp[(f"G-{i}", f"G-{j}")] = OPEResult()
    for s in ("+", "-"):
        for i in (1, 2):
            g = gens[f"G{s}{i}"]
            exp[("T", f"G{s}{i}")] = OPEResult({2: g.scale(Fraction(3, 2)), 1: derivative(g)})
    return exp


@dataclass
class Mismatch:
    pair: Tuple[str, str]
    pole: int
    expected: OperatorSum
    computed: OperatorSum


@dataclass
class N4Report:
    computed: Dict[Tuple[str, str], OPEResult] = field(default_factory=dict)
    expected: Dict[Tuple[str, str], OPEResult] = field(default_factory=dict)
    mismatches: List[Mismatch] = field(default_factory=list)
    brst_closed: Dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __bool__(self) -> bool:
        return self.ok

    def failed_pairs(self) -> List[Tuple[str, str]]:
        seen: List[Tuple[str, str]] = []
        for m in self.mismatches:
            if m.pair not in seen:
                seen.append(m.pair)
        return seen


def verify_n4(spec: CyclicAlgebraSpec | None = None) -> N4Report:
    """Compute every pairwise OPE of the eight generators and compare with the stated table.

    Pairs absent from the table are still computed (``report.computed``).
    ``brst_closed`` records Q(X) = 0 for each generator.
    """
    spec = spec or eps2()
    gens = n4_generators(spec)
    table, _, _ = pairing_inverse(spec)
    report = N4Report(expected=expected_table(gens))
    for a in GENERATOR_NAMES:
        for b in GENERATOR_NAMES:
            report.computed[(a, b)] = _at_hbar_one(singular_ope(gens[a], gens[b], table))
    for pair, exp in report.expected.items():
        got = report.computed[pair]
        for p in sorted(set(exp.poles) | set(got.poles), reverse=True):
            if exp[p] != got[p]:
                report.mismatches.append(Mismatch(pair, p, exp[p], got[p]))
    brst = BRST(spec)
    for name, x in gens.items():
        report.brst_closed[name] = brst.Q(x).is_zero()
    return report
