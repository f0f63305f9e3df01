"""Seeded random inputs shared by the checks, the tests and the benchmark."""

from __future__ import annotations

import random
from fractions import Fraction

from .gring import GRingElem, UnboundedElem
from .polytope import Constraint, DefinableSet, make_set
from .volume import check_spec_for_class, class_of

RANK2_SPECS = ((Fraction(40), Fraction(1)), (Fraction(50), Fraction(3)), (Fraction(64), Fraction(-1)))


def _rhs(rnd: random.Random, rank: int, lo: int = 0, hi: int = 8) -> list:
    first = Fraction(rnd.randint(lo, hi), rnd.choice([1, 2, 3, 4]))
    if rank == 1:
        return [first]
    return [first] + [Fraction(rnd.randint(-4, 4), rnd.choice([1, 2, 4])) for _ in range(rank - 1)]


def random_polytope(rnd: random.Random, rank: int = 1, max_dim: int = 3) -> DefinableSet:
    """A box with up to two extra cuts, sometimes unioned with a second one.
    Constraint denominators stay <= 4."""
    n = rnd.randint(1, max_dim)
    cells = []
    for _ in range(rnd.choice([1, 1, 1, 2]) if rank == 1 else 1):
        cons = []
        for i in range(n):
            e = tuple(1 if j == i else 0 for j in range(n))
            cons.append(Constraint(e, rnd.choice(["<", "<="]), _rhs(rnd, rank)))
            low = [Fraction(rnd.randint(0, 4), rnd.choice([1, 2, 4]))] + [Fraction(0)] * (rank - 1)
            cons.append(Constraint(tuple(-v for v in e), rnd.choice(["<", "<="]), low))
        for _ in range(rnd.randint(0, 2)):
            row = tuple(rnd.randint(-2, 2) for _ in range(n))
            if any(row):
                cons.append(Constraint(row, rnd.choice(["<", "<=", "<=", "="]), _rhs(rnd, rank, -8, 8)))
        cells.append(cons)
    return make_set(cells, n, rank=rank)


def polytope_corpus(n_rank1: int = 200, n_rank2: int = 24, seed: int = 2024) -> list:
    """[(X, specs)]: rank-1 sets with the default specialization, then rank-2
    sets kept only when all three specializations are order-consistent for
    the set and for its class."""
    rnd = random.Random(seed)
    out = [(random_polytope(rnd), [None]) for _ in range(n_rank1)]
    kept = 0
    while kept < n_rank2:
        X = random_polytope(rnd, rank=2)
        try:
            u = class_of(X)
            for sp in RANK2_SPECS:
                check_spec_for_class(X, u, sp)
        except ValueError:
            continue
        out.append((X, list(RANK2_SPECS)))
        kept += 1
    return out


def random_unbounded(rnd: random.Random) -> UnboundedElem:
    """Bounded part from i/e generators plus a multiple of the closed ray."""
    a = GRingElem.const(1, rnd.randint(-3, 3))
    for _ in range(rnd.randint(0, 2)):
        a = a * GRingElem.iota([Fraction(rnd.randint(-4, 4), rnd.choice([1, 2, 3]))])
    if rnd.random() < 0.4:
        a = a + GRingElem.e([Fraction(rnd.randint(0, 5), rnd.choice([2, 3]))]) * rnd.randint(-2, 2)
    b = GRingElem.const(1, rnd.randint(-3, 3))
    if rnd.random() < 0.5:
        b = b * GRingElem.iota([Fraction(rnd.randint(1, 4), 2)])
    return UnboundedElem(a, b)
