import json
import random
from fractions import Fraction
from pathlib import Path

import pytest
import sympy

from largen_voa.algebra import AlgebraSpecError, dual_numbers_deg2, eps2, load_model, pairing_inverse, spec_from_dict
from largen_voa.linalg import matrix_inverse, nullspace, rank_at, rank_generic
from largen_voa.scalars import GradedCoefficient, N

GOLDEN = Path(__file__).parent / "golden"


def test_eps2_fields_and_pairing():
    spec = eps2()
    table, fields, eta = pairing_inverse(spec)
    assert [(f.name, f.ghost) for f in fields] == [("c", -1), ("Z1", 0), ("Z2", 0), ("b", 1)]
    assert table("b", "c") == 1 and table("c", "b") == 1
    # omega = eta = G^{-1}; with (e1 e2) = 1 this puts -1 on Z1 Z2
    assert table("Z1", "Z2") == -1 and table("Z2", "Z1") == 1
    assert table("Z1", "Z1") == 0


def test_dual_numbers_fields():
    table, fields, _ = pairing_inverse(dual_numbers_deg2())
    assert [(f.name, f.ghost) for f in fields] == [("c", -1), ("b", 1)]
    assert table("b", "c") == 1


@pytest.mark.parametrize("spec", [eps2(), dual_numbers_deg2()])
def test_eta_is_two_sided_inverse(spec):
    g = spec.gram()
    _, _, eta = pairing_inverse(spec)
    n = spec.dim
    for i in range(n):
        for k in range(n):
            delta = int(i == k)
            assert sum(g[i][j] * eta[j][k] for j in range(n)) == delta
            assert sum(eta[i][j] * g[j][k] for j in range(n)) == delta


def test_builtins_validate():
    eps2().validate()
    dual_numbers_deg2().validate()


def test_load_from_toml_and_json(tmp_path):
    spec = load_model(str(GOLDEN / "dual_numbers.toml"))
    assert spec.field_names == ("c", "b")
    assert pairing_inverse(spec)[0] == pairing_inverse(dual_numbers_deg2())[0]
    data = {"basis": [{"name": "1", "degree": 0}, {"name": "x", "degree": 2}], "unit": 0,
            "m2": [], "trace": [0, 1]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(data))
    assert load_model(str(path)).field_names == ("phi0", "phi1")


def test_invalid_specs_are_rejected():
    base = {"basis": [{"name": "1", "degree": 0}, {"name": "x", "degree": 2}], "unit": 0, "m2": []}
    with pytest.raises(AlgebraSpecError):
        spec_from_dict({**base, "trace": [1, 0]})  # degenerate pairing
    with pytest.raises(AlgebraSpecError):
        spec_from_dict({**base, "trace": [0, 1], "m2": [["x", "x", [1, 0]]]})  # not graded
    with pytest.raises(AlgebraSpecError):
        load_model("no-such-model")


def test_linalg_against_sympy():
    rng = random.Random(4)
    for _ in range(20):
        n = rng.randint(1, 5)
        rows = [[Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
        m = sympy.Matrix(rows)
        assert len(nullspace(rows)) == n - m.rank()
        if m.det() != 0:
            inv = matrix_inverse(rows)
            assert sympy.Matrix(inv) == m.inv()


def test_rank_generic_and_specialized():
    # [[N, 1], [1, 1]] drops rank at N = 1 only
    rows = [{0: N, 1: GradedCoefficient.const(1)}, {0: GradedCoefficient.const(1), 1: GradedCoefficient.const(1)}]
    assert rank_generic(rows, 2) == 2
    assert rank_at(rows, 2, Fraction(1)) == 1
    assert rank_at(rows, 2, Fraction(3)) == 2
