import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from largen_voa.algebra import dual_numbers_deg2, eps2, pairing_inverse
from largen_voa.operators import OperatorSum, enumerate_basis, multitrace_ghost, multitrace_letters
from largen_voa.parser import parse_expression
from largen_voa.scalars import GradedCoefficient

sys.path.insert(0, str(Path(__file__).parent))

GOLDEN = Path(__file__).parent / "golden"
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def spec():
    return eps2()


@pytest.fixture(scope="session")
def dual():
    return dual_numbers_deg2()


@pytest.fixture(scope="session")
def table(spec):
    return pairing_inverse(spec)[0]


@pytest.fixture(scope="session")
def P(spec):
    fm = spec.field_map()
    return lambda src: parse_expression(src, fm)


_POOLS = {}


def basis_pool(spec, max_letters, max_deriv):
    key = (spec.name, max_letters, max_deriv)
    if key not in _POOLS:
        _POOLS[key] = enumerate_basis(spec.fields(), max_letters, max_deriv)
    return _POOLS[key]


def random_operator(rng: random.Random, spec, max_letters=3, max_deriv=1, max_traces=5, terms=2) -> OperatorSum:
    """Small random combination of multi-traces with rational coefficients."""
    pool = [m for m in basis_pool(spec, max_letters, max_deriv) if m and len(m) <= max_traces]
    first = rng.choice(pool)
    parity = multitrace_ghost(first) & 1
    pool = [m for m in pool if multitrace_ghost(m) & 1 == parity]
    out = OperatorSum()
    for i in range(terms):
        m = first if i == 0 else rng.choice(pool)
        c = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2]))
        out = out + OperatorSum({m: GradedCoefficient.const(c)})
    return out


def random_pair(rng: random.Random, spec, total_letters=8, max_deriv=1, max_traces=5):
    """Two single-term operators whose letter counts add up to at most total_letters."""
    la = rng.randint(1, total_letters - 1)
    lb = rng.randint(1, total_letters - la)
    pool_a = [m for m in basis_pool(spec, la, max_deriv) if m and len(m) <= max_traces and multitrace_letters(m) == la]
    pool_b = [m for m in basis_pool(spec, lb, max_deriv) if m and len(m) <= max_traces and multitrace_letters(m) == lb]
    one = GradedCoefficient.const(1)
    return OperatorSum({rng.choice(pool_a): one}), OperatorSum({rng.choice(pool_b): one})
