import itertools
import math
import random

import pytest

from largen_voa.diagrams import (
    BLACK,
    WHITE,
    Diagram,
    DiagramSum,
    ShapeError,
    braiding,
    coev,
    compose,
    count_diagrams,
    enumerate_diagrams,
    ev,
    identity,
    loops_by_walking,
    parse_diagram,
    standard_word,
    structural_diagram,
    tensor,
    trace_diagram,
    word,
)
from largen_voa.scalars import GradedCoefficient, N, ONE


def cap_cup():
    # [1,1] -> 1 -> [1,1]
    return compose(coev("B"), ev("W"))


def test_cap_cup_squares_to_n_times_itself():
    (x,) = cap_cup().terms
    assert compose(x, x) == DiagramSum({x: N})


def test_identity_is_neutral():
    rng = random.Random(1)
    for w, v in [("BW", "BW"), ("BWBW", "BW"), ("BBW", "BBW"), ("", "BW")]:
        ds = list(enumerate_diagrams(w, v))
        for d in rng.sample(ds, min(5, len(ds))):
            assert compose(identity(v), d) == DiagramSum.of(d)
            assert compose(d, identity(w)) == DiagramSum.of(d)


def test_closing_both_strands_gives_n_squared():
    res = compose(ev("WB"), coev("BW"))
    assert res == DiagramSum({Diagram((), (), ()): N**2})


def test_snake_identity():
    w = word("BW")
    lhs = compose(tensor(identity(w), ev(w)), tensor(coev(w), identity(w)))
    assert lhs == DiagramSum.of(identity(w))


def test_braiding_squares_to_identity():
    assert compose(braiding("B", "B"), braiding("B", "B")) == DiagramSum.of(identity("BB"))


def test_tensor_examples():
    assert tensor(identity("B"), identity("W")) == identity("BW")
    caps = tensor(ev("W"), ev("W"))
    assert caps.top == word("BWBW") and caps.bottom == ()
    assert tensor(braiding("B", "W"), identity("B")).top == word("BWB")
    assert tensor(braiding("B", "W"), identity("B")).bottom == word("WBB")


def test_trace_one_is_a_single_arc():
    d = trace_diagram(1)
    assert d.top == () and d.bottom == (BLACK, WHITE) and d.edges == ((0, 1),)
    with pytest.raises(ShapeError):
        trace_diagram(0)
    assert structural_diagram("trace", 2) == trace_diagram(2)


def test_counting_examples():
    assert count_diagrams("BWBW", "BW") == 6
    assert count_diagrams("B", "W") == 0
    for r in range(5):
        assert count_diagrams("B" * r, "B" * r) == math.factorial(r)


@pytest.mark.parametrize("r,s", [(r, s) for r in range(6) for s in range(6) if r + s <= 5])
def test_walled_brauer_dimension(r, s):
    w = standard_word(r, s)
    assert count_diagrams(w, w) == math.factorial(r + s)


@pytest.mark.parametrize("w,v", [("BWBW", "BW"), ("BBW", "BBW"), ("BWW", "W"), ("BW", "BW"), ("BBWW", "")])
def test_count_matches_enumeration(w, v):
    assert len(set(enumerate_diagrams(w, v))) == count_diagrams(w, v)


def test_composition_is_associative_and_loops_agree():
    rng = random.Random(2)
    words = ["BW", "WB", "BWBW", "BBWW", "BWWB"]
    for _ in range(100):
        a, b, c, d = (word(rng.choice(words)) for _ in range(4))
        x = rng.choice(list(enumerate_diagrams(a, b)))
        y = rng.choice(list(enumerate_diagrams(b, c)))
        z = rng.choice(list(enumerate_diagrams(c, d)))
        assert compose(z, compose(y, x)) == compose(compose(z, y), x)
        ((_, coeff),) = compose(y, x).terms.items()
        assert coeff == N ** loops_by_walking(x, y)


def test_parse_and_text_round_trip():
    d = parse_diagram("t1-b1, t2-t3, b2-t4", "BBWB", "BB")
    assert parse_diagram(d.to_text(), d.top, d.bottom) == d
    with pytest.raises(ShapeError):
        parse_diagram("t1-b1", "B", "W")
    with pytest.raises(ShapeError):
        parse_diagram("t1-b9", "B", "B")
    with pytest.raises(ShapeError):
        compose(identity("B"), identity("W"))


def test_diagram_sum_rejects_non_polynomial_coefficients():
    with pytest.raises(ValueError):
        DiagramSum({identity("B"): GradedCoefficient.monomial(b=1)})
    s = DiagramSum.of(identity("B")) + identity("B")
    assert s == DiagramSum({identity("B"): ONE * 2})
