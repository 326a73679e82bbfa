"""The twelve acceptance criteria, one test each.

Every test records a ``CRITERION k: PASS|FAIL  detail`` line.  The lines are
echoed in the pytest terminal summary, and running this file directly prints
them as well.  Budgets for the long checks come from the environment:

    LARGEN_VOA_Q2_BUDGET   seconds for the Q^2 basis scan of criterion 3 (default 300)
"""

from __future__ import annotations

import math
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES as RESULTS, random_pair  # noqa: E402
from largen_voa.algebra import dual_numbers_deg2, eps2, pairing_inverse  # noqa: E402
from largen_voa.brst import BRST, cohomology_dimensions, q_squared_check  # noqa: E402
from largen_voa.cyclic import Truncation, classical_limit_compare, cyclic_basis, hochschild_b  # noqa: E402
from largen_voa.diagrams import DiagramSum, coev, compose, count_diagrams, ev, standard_word  # noqa: E402
from largen_voa.n4 import verify_n4  # noqa: E402
from largen_voa.ope import (  # noqa: E402
    borcherds_sides,
    contraction_terms,
    d_coefficient,
    enumerate_contraction_sets,
    grading_check,
    is_planar_genus,
    is_planar_iterative,
    rees_reparametrized_ope,
    singular_ope,
    skew_symmetry_check,
    taylor_at_w,
)
from largen_voa.operators import OperatorSum, multitrace_letters  # noqa: E402
from largen_voa.oracle import singular_ope_via_diagrams  # noqa: E402
from largen_voa.parser import parse_expression  # noqa: E402
from largen_voa.scalars import HBAR, N, GradedCoefficient  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"

SPEC = eps2()
TABLE = pairing_inverse(SPEC)[0]
FM = SPEC.field_map()


def P(src: str) -> OperatorSum:
    return parse_expression(src, FM)


def record(k: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)


# ---------------------------------------------------------------------------


def test_criterion_01_diagram_calculus():
    start = time.perf_counter()
    (x,) = compose(coev("B"), ev("W")).terms
    square = compose(x, x) == DiagramSum({x: N})
    six = count_diagrams("BWBW", "BW") == 6
    dims = all(
        count_diagrams(standard_word(r, s), standard_word(r, s)) == math.factorial(r + s)
        for r in range(6) for s in range(6) if r + s <= 5
    )
    secs = time.perf_counter() - start
    ok = square and six and dims and secs < 1
    record(1, ok, f"X^2 = N X: {square}; (BWBW, BW) count 6: {six}; dim End([r,s]) = (r+s)!: {dims}; {secs:.3f}s")
    assert ok


def test_criterion_02_bcc_ope():
    start = time.perf_counter()
    a = P("Tr(b c c)")
    res = singular_ope(a, a, TABLE)
    target = P("N*Tr(d^1 c, c) - Tr(d^1 c)*Tr(c)").scale(HBAR * HBAR * 2)
    poles_ok = res[2].is_zero() and res[1] == target and set(res.poles) == {1}

    # bilocal form: the double contractions give 2(N Tr(c(z) c(w)) - Tr c(z) Tr c(w)) / (z-w)^2
    (m,) = a.terms
    bilocal: dict = {}
    single_total = OperatorSum()
    for term in contraction_terms(m, m, TABLE):
        if len(term.pairs) == 2:
            key = (term.loops, term.traces)
            bilocal[key] = bilocal.get(key, 0) + term.value
        else:
            for p in range(term.pole):
                for mt, w in taylor_at_w(term.traces, p):
                    single_total.add_term(mt, GradedCoefficient.const(term.value * w))
    cz, cw = ("c", 0, -1), ("c", 0, -1)
    want = {
        (1, (((cz, True), (cw, False)),)): 2,
        (0, (((cz, True),), ((cw, False),))): -2,
    }
    shape_ok = {(l, tuple(tuple((tuple(x), z) for x, z in t) for t in tr)): v for (l, tr), v in bilocal.items()} == want
    resum = {}
    for (loops, traces), v in bilocal.items():
        for order in range(2):
            target_pole = resum.setdefault(2 - order, OperatorSum())
            for mt, w in taylor_at_w(traces, order):
                target_pole.add_term(mt, N**loops * HBAR * HBAR * (v * w))
    resum_ok = resum[2].is_zero() and resum[1] == res[1] and single_total.is_zero()
    secs = time.perf_counter() - start
    ok = poles_ok and shape_ok and resum_ok and secs < 1
    record(2, ok, f"poles (2: 0, 1: 2(N Tr(dc c) - Tr(dc)Tr(c))): {poles_ok}; bilocal form: {shape_ok}; "
                  f"re-summation: {resum_ok}; {secs:.3f}s")
    assert ok


def test_criterion_03_q_squared():
    budget = float(os.environ.get("LARGEN_VOA_Q2_BUDGET", "300"))
    rep = q_squared_check(SPEC, 6, 2, time_budget=budget)
    jj_ok = rep.jj.is_zero()
    ok = jj_ok and rep.holds and rep.complete
    if rep.complete:
        scan = f"Q(Q(x)) = 0 on all {rep.total} basis operators" if rep.holds else f"witness {rep.witness[0]}"
    else:
        scan = (f"INCOMPLETE: Q(Q(x)) = 0 on {rep.checked} of {rep.total} basis operators "
                f"(complete through {rep.letters_covered} letters) within {budget:.0f}s")
    record(3, ok, f"J(z)J(w) = 0: {jj_ok}; {scan}; {rep.seconds:.0f}s")
    assert ok


def test_criterion_04_counterexample():
    start = time.perf_counter()
    dual = dual_numbers_deg2()
    brst = BRST(dual)
    jj = brst.jj()
    target = parse_expression("N*Tr(d^1 c, c) - Tr(d^1 c)*Tr(c)", dual.field_map()).scale(HBAR * HBAR * 2)
    shape = set(jj.poles) == {1} and jj[1] == target
    secs = time.perf_counter() - start
    ok = not jj.is_zero() and shape and secs < 1
    record(4, ok, f"J(z)J(w) != 0 for C[x]/(x^2): {not jj.is_zero()}; witness 2(N Tr(dc c) - Tr(dc)Tr(c)): {shape}; {secs:.3f}s")
    assert ok


@pytest.fixture(scope="module")
def n4_report():
    start = time.perf_counter()
    rep = verify_n4(SPEC)
    return rep, time.perf_counter() - start


def test_criterion_05_n4_table(n4_report):
    rep, secs = n4_report
    ok = rep.ok and secs < 30
    failed = ", ".join(f"{a}{b}" for a, b in rep.failed_pairs())
    detail = "all entries match" if rep.ok else f"{len(rep.mismatches)} mismatching poles in {failed}"
    record(5, ok, f"{detail}; {secs:.2f}s")
    assert ok, "\n".join(f"{m.pair} pole {m.pole}: expected {m.expected}, computed {m.computed}" for m in rep.mismatches)


def test_criterion_06_generators_closed(n4_report):
    rep, secs = n4_report
    ok = all(rep.brst_closed.values()) and secs < 30
    record(6, ok, "Q(X) = 0 for " + ", ".join(f"{k}: {v}" for k, v in rep.brst_closed.items()))
    assert ok


def test_criterion_07_classical_limit():
    start = time.perf_counter()
    brst = BRST(SPEC)
    basis = cyclic_basis(SPEC, 3, 2, truncation=Truncation(5, 2))
    bad = [f for f in basis if not classical_limit_compare(f, SPEC, brst)]
    bb_bad = [f for f in basis if not hochschild_b(hochschild_b(f, SPEC), SPEC).is_zero()]
    ok = not bad and not bb_bad
    record(7, ok, f"Q0 Phi_f = Phi_bf on {len(basis) - len(bad)}/{len(basis)} cyclic cochains; "
                  f"b b = 0 on {len(basis) - len(bb_bad)}/{len(basis)}; {time.perf_counter() - start:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def random_corpus():
    """200 pairs over the eps2 fields: <= 8 letters per pair, <= 5 traces each, deriv <= 1."""
    rng = random.Random(20240601)
    return [random_pair(rng, SPEC, 8, 1, 5) for _ in range(200)]


def test_criterion_08_grading(random_corpus):
    start = time.perf_counter()
    checked = 0
    violations = []
    for a, b in random_corpus:
        rep = grading_check(a, b, TABLE)
        checked += rep.checked
        violations += rep.violations
    ok = not violations
    record(8, ok, f"{checked} singular coefficients over {len(random_corpus)} pairs, {len(violations)} violations; "
                  f"{time.perf_counter() - start:.0f}s")
    assert ok


def test_criterion_09_planar(random_corpus):
    start = time.perf_counter()
    mismatched = 0
    predicate_sets = 0
    predicate_bad = 0
    for a, b in random_corpus:
        full = rees_reparametrized_ope(a, b, TABLE)
        planar = rees_reparametrized_ope(a, b, TABLE, planar=True)
        only_d1 = all(e[0] == 2 for op in planar.poles.values() for c in op.terms.values() for e in c.terms)
        if not (only_d1 and d_coefficient(planar, 2) == d_coefficient(full, 2)):
            mismatched += 1
        for ma in a.terms:
            for mb in b.terms:
                for s in enumerate_contraction_sets(ma, mb, TABLE):
                    predicate_sets += 1
                    predicate_bad += is_planar_genus(ma, mb, s) != is_planar_iterative(ma, mb, s)
    ok = mismatched == 0 and predicate_bad == 0
    record(9, ok, f"planar OPE = d^1 part on {len(random_corpus) - mismatched}/{len(random_corpus)} pairs; "
                  f"predicates agree on {predicate_sets - predicate_bad}/{predicate_sets} contraction sets; "
                  f"{time.perf_counter() - start:.0f}s")
    assert ok


def _corpus():
    lines = [l.strip() for l in (GOLDEN / "corpus.txt").read_text().splitlines()]
    ops = [P(l) for l in lines if l and not l.startswith("#")]
    return [x for x in ops if not x.is_zero()]


def test_criterion_10_oracle():
    start = time.perf_counter()
    ops = _corpus()
    size = lambda x: max((multitrace_letters(m) for m in x.terms), default=0)
    pairs = [(a, b) for a in ops for b in ops if size(a) + size(b) <= 6]
    bad = [(a, b) for a, b in pairs if singular_ope(a, b, TABLE) != singular_ope_via_diagrams(a, b, TABLE)]
    ok = not bad and len(pairs) > 0
    record(10, ok, f"diagram oracle agrees on {len(pairs) - len(bad)}/{len(pairs)} corpus pairs; "
                   f"{time.perf_counter() - start:.1f}s")
    assert ok


def test_criterion_11_axioms():
    from conftest import random_operator

    start = time.perf_counter()
    rng = random.Random(11)
    b_total = b_bad = b_inconclusive = 0
    for _ in range(20):
        a, b, c = (random_operator(rng, SPEC, 2, 1) for _ in range(3))
        for m in range(-2, 3):
            for k in range(-2, 3):
                for l in range(-2, 3):
                    rep = borcherds_sides(a, b, c, m, k, l, TABLE)
                    b_total += 1
                    b_bad += not rep.holds
                    b_inconclusive += rep.inconclusive
    s_total = s_bad = 0
    for _ in range(20):
        a, b = random_operator(rng, SPEC, 3, 1), random_operator(rng, SPEC, 3, 1)
        for n in range(-2, 3):
            s_total += 1
            s_bad += not skew_symmetry_check(a, b, n, TABLE)
    ok = b_bad == 0 and b_inconclusive == 0 and s_bad == 0
    record(11, ok, f"Borcherds {b_total - b_bad}/{b_total} ({b_inconclusive} inconclusive); "
                   f"skew symmetry {s_total - s_bad}/{s_total}; {time.perf_counter() - start:.0f}s")
    assert ok


def test_criterion_12_cohomology_table():
    import json

    start = time.perf_counter()
    golden = json.loads((GOLDEN / "cohomology_eps2.json").read_text())["generic_L4_D1"]
    tab = cohomology_dimensions(SPEC, 4, 1)
    got = [{"h": str(h), "ghost": g, "size": s, "dim": d} for h, g, s, d in tab.rows()]
    by_ghost = {str(g): d for g, d in tab.by_ghost().items()}
    ok = got == golden["sectors"] and by_ghost == golden["by_ghost"]
    record(12, ok, f"pinned (letters <= 4, deriv <= 1, generic N) table, {len(got)} sectors, "
                   f"dim H by ghost {by_ghost}; {time.perf_counter() - start:.1f}s")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
