"""Seeded random generators shared across the suite.

Everything here draws from a caller-supplied random.Random so each test
pins its own seed; coefficients stay small sparse integer polynomials to
keep symbolic expansion fast.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
import sympy as sp

from formcalc import Connection, Form


def rand_fraction(rng: random.Random, lo: int = -3, hi: int = 3, max_den: int = 7) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(lo * den, hi * den), den)


def rand_poly(rng: random.Random, names, max_terms: int = 2, max_degree: int = 3) -> sp.Expr:
    symbols = [sp.Symbol(n) for n in names]
    total = sp.Integer(0)
    for _ in range(rng.randint(1, max_terms)):
        coeff = sp.Integer(rng.choice([-3, -2, -1, 1, 2, 3]))
        monomial = coeff
        degree_budget = rng.randint(0, max_degree)
        for _ in range(degree_budget):
            monomial *= rng.choice(symbols)
        total += monomial
    return total


def rand_form(rng: random.Random, coords, degree: int, max_terms: int = 2,
              max_coeff_terms: int = 2, max_degree: int = 3) -> Form:
    n = len(coords)
    if degree > n:
        return Form.zero(coords, degree)
    all_indices = list(itertools.combinations(range(n), degree))
    rng.shuffle(all_indices)
    table = {}
    for idx in all_indices[: rng.randint(1, min(max_terms, len(all_indices)))]:
        table[idx] = rand_poly(rng, coords, max_coeff_terms, max_degree)
    return Form(coords, degree, table)


def rand_connection(rng: random.Random, n: int, entries: int = 2, polynomial: bool = False,
                    coords=None) -> Connection:
    nested = [[[sp.Integer(0)] * n for _ in range(n)] for _ in range(n)]
    for _ in range(entries):
        sigma, beta, alpha = (rng.randrange(n) for _ in range(3))
        if polynomial and coords is not None:
            value = rand_poly(rng, coords, 1, 2)
        else:
            value = sp.Integer(rng.choice([-2, -1, 1, 2]))
        nested[sigma][beta][alpha] = value
    return Connection.from_nested(nested)


def symmetrize(conn: Connection) -> Connection:
    n = conn.dimension
    nested = [
        [
            [conn[s, b, a] + conn[s, a, b] for a in range(n)]
            for b in range(n)
        ]
        for s in range(n)
    ]
    return Connection.from_nested(nested)


@pytest.fixture
def rng():
    return random.Random(20240)
