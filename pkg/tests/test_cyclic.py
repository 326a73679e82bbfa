import random
from fractions import Fraction

import pytest

from largen_voa.brst import BRST, RefusalError
from largen_voa.cyclic import (
    CyclicCochain,
    Truncation,
    classical_limit_compare,
    cochain_to_operator,
    cyclic_basis,
    cyclic_symmetrize,
    hochschild_b,
    is_cyclic,
    random_cochain,
)
from largen_voa.operators import OperatorSum

WIDE = Truncation(5, 2)


def trace_functional(spec):
    return CyclicCochain(1, {((i, 0),): v for i, v in enumerate(spec.trace) if v}, WIDE)


def test_b_kills_the_trace(spec, dual):
    for s in (spec, dual):
        assert hochschild_b(trace_functional(s), s).is_zero()


def test_dual_numbers_value(dual):
    f = CyclicCochain(2, {((1, 0), (1, 0)): 1}, WIDE)
    bf = hochschild_b(f, dual)
    assert bf((0, 0), (1, 0), (1, 0)) == 2


def test_b_squared_vanishes_on_random_cochains(spec, dual):
    rng = random.Random(31)
    for s in (spec, dual):
        for _ in range(60):
            f = random_cochain(s, rng.randint(1, 3), 2, rng, truncation=WIDE)
            assert hochschild_b(hochschild_b(f, s), s).is_zero()


def test_dictionary_examples(spec, P):
    unit = CyclicCochain(1, {((0, 0),): 1}, WIDE)
    assert cochain_to_operator(unit, spec) == P("Tr(c)")
    f = cyclic_symmetrize(CyclicCochain(2, {((1, 0), (2, 0)): 1}, WIDE), spec)
    assert is_cyclic(f, spec)
    assert cochain_to_operator(f, spec) == P("1/2*Tr(Z1 Z2)")
    assert cochain_to_operator(CyclicCochain(2, {}, WIDE), spec).is_zero()
    g = CyclicCochain(1, {((0, 2),): 1}, WIDE)
    assert cochain_to_operator(g, spec) == P("1/2*Tr(d^2 c)")


def test_symmetrize_is_a_projector(spec):
    rng = random.Random(32)
    for _ in range(40):
        f = random_cochain(spec, rng.randint(1, 3), 2, rng, truncation=WIDE)
        g = cyclic_symmetrize(f, spec)
        assert cyclic_symmetrize(g, spec) == g


def test_classical_examples(spec):
    brst = BRST(spec)
    assert classical_limit_compare(CyclicCochain(1, {((0, 0),): 1}, WIDE), spec, brst)
    rep = classical_limit_compare(trace_functional(spec), spec, brst)
    assert rep and rep.q0.is_zero() and rep.phi_bf.is_zero()
    assert classical_limit_compare(CyclicCochain(2, {}, WIDE), spec, brst)


def test_classical_on_random_cyclic_cochains(spec):
    brst = BRST(spec)
    rng = random.Random(33)
    for _ in range(20):
        f = cyclic_symmetrize(random_cochain(spec, rng.randint(1, 3), 2, rng, truncation=WIDE), spec)
        assert classical_limit_compare(f, spec, brst)


def test_truncation_refusals(spec):
    with pytest.raises(RefusalError):
        CyclicCochain(2, {((0, 2), (1, 1)): 1}, Truncation(3, 2))
    with pytest.raises(RefusalError):
        hochschild_b(CyclicCochain(3, {((0, 0), (1, 0), (2, 0)): 1}, Truncation(3, 2)), spec)
    with pytest.raises(ValueError):
        CyclicCochain(2, {((0, 0),): 1})


def test_basis_size_is_stable(spec):
    basis = cyclic_basis(spec, 3, 2)
    assert len(basis) == 276
    assert all(is_cyclic(f, spec) for f in basis)
