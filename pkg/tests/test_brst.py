import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from conftest import random_operator
from largen_voa.brst import (
    BRST,
    BRST_NORMALIZATION,
    RefusalError,
    brst_differential,
    brst_field_raw,
    build_brst_field,
    cohomology_dimensions,
    koszul_kappa,
    q_squared_check,
    sector_basis,
)
from largen_voa.ope import mode_product
from largen_voa.operators import UNIT, OperatorSum
from largen_voa.parser import parse_expression
from largen_voa.render import operator_to_text
from largen_voa.scalars import HBAR, specialize_hbar

GOLDEN = Path(__file__).parent / "golden"


def test_current_of_main_model(spec, P):
    assert build_brst_field(spec) == P("Tr(b c c) + Tr(c Z1 Z2) - Tr(c Z2 Z1)")


def test_current_of_dual_numbers(dual):
    fm = dual.field_map()
    assert build_brst_field(dual) == parse_expression("Tr(b c c)", fm)


def test_normalization_constant_is_pinned(spec, dual):
    assert BRST_NORMALIZATION == 2
    for s in (spec, dual):
        assert brst_field_raw(s).scale(BRST_NORMALIZATION) == build_brst_field(s)


def test_kappa():
    assert koszul_kappa([]) == 1
    assert koszul_kappa([1, 0]) == -1
    assert koszul_kappa([0, 1]) == 1
    assert koszul_kappa([1, 1, 0]) == 1


def test_q_of_unit_and_pinned_images(spec):
    brst = BRST(spec)
    assert brst.Q(OperatorSum.unit()).is_zero()
    fm = spec.field_map()
    golden = json.loads((GOLDEN / "brst_images.json").read_text())
    for src, text in golden.items():
        assert operator_to_text(brst_differential(spec, parse_expression(src, fm))) == text
    # Q(Tr(b c)) is hbar J
    assert brst.Q(parse_expression("Tr(b c)", fm)) == brst.J.scale(HBAR)


def test_q_is_an_odd_derivation_of_modes(spec, table):
    brst = BRST(spec)
    rng = random.Random(21)
    for _ in range(15):
        a = random_operator(rng, spec, 2, 1, terms=1)
        b = random_operator(rng, spec, 2, 1, terms=1)
        sign = -1 if a.parity() else 1
        for n in (-1, 0, 1):
            lhs = brst.Q(mode_product(a, n, b, table))
            rhs = mode_product(brst.Q(a), n, b, table) + mode_product(a, n, brst.Q(b), table).scale(sign)
            assert lhs == rhs


def test_q_squared_on_small_basis(spec):
    rep = q_squared_check(spec, 3, 1)
    assert rep.holds and rep.complete and rep.jj.is_zero()
    assert rep.checked == rep.total > 500


def test_q_squared_counterexample(dual):
    rep = q_squared_check(dual, 3, 1)
    assert not rep.holds
    m, val = rep.witness
    assert m == ()
    fm = dual.field_map()
    expected = parse_expression("N*Tr(d^1 c, c) - Tr(d^1 c)*Tr(c)", fm).scale(HBAR * HBAR * 2)
    assert val == expected
    assert rep.jj.poles.keys() == {1}


def test_q_squared_unit_only_basis(dual, spec):
    assert q_squared_check(spec, 0, 0, basis=[UNIT]).holds
    assert not q_squared_check(dual, 0, 0, basis=[UNIT]).holds


def test_q_squared_time_budget(spec):
    rep = q_squared_check(spec, 4, 1, time_budget=0.0)
    assert rep.holds and not rep.complete and rep.checked < rep.total


def test_sector_basis():
    from largen_voa.algebra import eps2

    fields = eps2().fields()
    assert sector_basis(fields, Fraction(0), 0) == [UNIT]
    assert sector_basis(fields, Fraction(-1), 0) == []
    assert len(sector_basis(fields, Fraction(1, 2), 0)) == 2  # Tr(Z1), Tr(Z2)


def test_cohomology_refusals(spec, dual):
    with pytest.raises(RefusalError):
        cohomology_dimensions(dual, 3, 1)
    with pytest.raises(RefusalError):
        cohomology_dimensions(spec, 2, 0, sectors=[(Fraction(3), 0)])


def test_cohomology_small_golden(spec):
    golden = json.loads((GOLDEN / "cohomology_eps2.json").read_text())["generic_L3_D1"]
    tab = cohomology_dimensions(spec, 3, 1)
    got = [{"h": str(h), "ghost": g, "size": s, "dim": d} for h, g, s, d in tab.rows()]
    assert got == golden["sectors"]
    assert tab.dims[(Fraction(0), 0)] == 1  # the unit is a nontrivial class
    # Tr(c) is closed and not exact: a class in ghost -1
    assert tab.dims[(Fraction(0), -1)] == 1


def test_cohomology_at_rational_n(spec):
    generic = cohomology_dimensions(spec, 3, 1)
    for n in (Fraction(2), Fraction(-3, 2)):
        special = cohomology_dimensions(spec, 3, 1, n=n)
        for s, d in generic.dims.items():
            assert special.dims[s] >= d  # ranks can only drop at special values


def test_empty_sector_request_gives_empty_table(spec):
    tab = cohomology_dimensions(spec, 3, 1, sectors=[])
    assert tab.dims == {} and tab.by_ghost() == {}
