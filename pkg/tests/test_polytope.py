import itertools
import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from motivic.corpus import random_polytope
from motivic.polytope import (Constraint as C, box, count_lattice, dimension, dump_polytope, euclid_volume,
                              is_bounded, is_empty, load_polytope, make_set)

REL = {"<": lambda s, r: s < r, "<=": lambda s, r: s <= r, "=": lambda s, r: s == r,
       ">=": lambda s, r: s >= r, ">": lambda s, r: s > r}


def brute_count(cells, n, m, spec=(1,), radius=5):
    """Union count over a box of (1/m)Z points, straight from the constraints."""
    total = 0
    for y in itertools.product(range(-radius * m, radius * m + 1), repeat=n):
        x = [F(v, m) for v in y]

        def inside(cons):
            for c in cons:
                lhs = sum(a * b for a, b in zip(c.row, x))
                rhs = sum(F(r) * s for r, s in zip(c.rhs, spec))
                if not REL[c.rel](lhs, rhs):
                    return False
            return True

        total += any(inside(cons) for cons in cells)
    return total


def test_normalize_union_and_duplicates():
    X = make_set([[C((1,), "<", [1]), C((1,), ">=", [0])], [C((1,), "<", [2]), C((1,), ">=", [0])]], 1)
    assert [count_lattice(X, m) for m in (1, 2, 3)] == [2, 4, 6]
    cell = [C((1,), "<", [1]), C((1,), ">=", [0])]
    Y = make_set([cell, cell], 1)
    assert len(Y.cells) == 1


def test_inconsistent_cell_is_dropped():
    X = make_set([[C((1,), "<", [0]), C((1,), ">", [0])]], 1)
    assert X.is_empty() and dimension(X) == -1


def test_cells_are_disjoint():
    rnd = random.Random(3)
    for _ in range(30):
        X = random_polytope(rnd)
        for a, b in itertools.combinations(X.cells, 2):
            assert is_empty(a.internal() + b.internal(), X.rank)


def test_is_bounded_examples():
    assert is_bounded(box([0, 0], [1, 1]))
    assert not is_bounded(make_set([[C((1,), ">=", [0])]], 1))
    assert is_bounded(make_set([[C((2,), "=", [1])]], 1))


def test_count_examples():
    assert count_lattice(box([0, 0], [1, 1]), 2) == 4
    empty = make_set([], 2)
    assert all(count_lattice(empty, m) == 0 for m in range(1, 5))
    half = make_set([[C((2,), "=", [1])]], 1)
    assert count_lattice(half, 2) == 1
    assert count_lattice(half, 1) == 0


def test_count_rejects_unbounded_and_bad_spec():
    with pytest.raises(ValueError):
        count_lattice(make_set([[C((1,), ">=", [0])]], 1), 1)
    X = make_set([[C((1,), ">=", [0, 0]), C((1,), "<", [0, 1])]], 1, rank=2)
    with pytest.raises(ValueError):
        count_lattice(X, 1, (1, -1))


def test_volume_examples():
    assert euclid_volume(box([0, 0], [1, 1])) == 1
    tri = make_set([[C((0, -1), "<=", [0]), C((-1, 1), "<", [0]), C((1, 0), "<", [1])]], 2)
    assert euclid_volume(tri) == F(1, 2)
    point = make_set([[C((1, 0), "=", [0]), C((0, 1), "=", [0])]], 2)
    assert euclid_volume(point) == 0


def test_dimension_examples():
    assert dimension(box([0, 0], [1, 1])) == 2
    seg = make_set([[C((0, 1), "=", [0]), C((1, 0), ">=", [0]), C((1, 0), "<", [1])]], 2)
    assert dimension(seg) == 1
    assert dimension(make_set([], 2)) == -1


def test_file_round_trip(tmp_path):
    X = make_set([[C((1, 1), "<=", [F(3, 2)]), C((1, 0), ">", [0]), C((0, 1), ">=", [0])]], 2)
    doc = dump_polytope(X)
    path = tmp_path / "x.json"
    path.write_text(json.dumps(doc))
    Y = load_polytope(str(path))
    assert [count_lattice(Y, m) for m in range(1, 5)] == [count_lattice(X, m) for m in range(1, 5)]
    assert load_polytope(json.dumps(doc)).ambient == 2


def test_count_matches_brute_force_on_random_sets():
    rnd = random.Random(11)
    for _ in range(40):
        n = rnd.randint(1, 2)
        cells = []
        for _ in range(rnd.choice([1, 2])):
            cons = []
            for i in range(n):
                e = tuple(1 if j == i else 0 for j in range(n))
                cons.append(C(e, rnd.choice(["<", "<="]), [F(rnd.randint(0, 8), 4)]))
                cons.append(C(tuple(-v for v in e), "<=", [F(rnd.randint(0, 8), 4)]))
            row = tuple(rnd.randint(-2, 2) for _ in range(n))
            if any(row):
                cons.append(C(row, rnd.choice(["<", "<=", "="]), [F(rnd.randint(-8, 8), 4)]))
            cells.append(cons)
        X = make_set(cells, n)
        for m in (1, 2, 3):
            assert count_lattice(X, m) == brute_count(cells, n, m)


def test_rank_two_specialization_matches_brute_force():
    cells = [[C((1, 0), ">=", [0, 0]), C((1, 0), "<", [1, 0]), C((0, 1), ">=", [0, 0]),
              C((1, 1), "<=", [0, 1])]]
    X = make_set(cells, 2, rank=2)
    for spec in ((40, 1), (50, 3)):
        for m in (1, 2):
            assert count_lattice(X, m, spec) == brute_count(cells, 2, m, spec, radius=4)


@given(st.randoms(use_true_random=False))
def test_count_additive_over_cells(rnd):
    X = random_polytope(rnd, max_dim=2)
    for m in (1, 2, 3):
        parts = sum(count_lattice(make_set([c.constraints], X.ambient), m) for c in X.cells)
        assert parts == count_lattice(X, m)


@given(st.randoms(use_true_random=False), st.integers(2, 3))
def test_scaled_specialization(rnd, s):
    X = random_polytope(rnd, max_dim=2)
    for m in (1, 2):
        assert count_lattice(X, m, (s,)) == count_lattice(X, s * m, (1,))


def test_volume_approximated_by_counts():
    rnd = random.Random(3)
    for _ in range(15):
        n = rnd.choice([2, 3])
        cons = []
        for i in range(n):
            e = tuple(1 if j == i else 0 for j in range(n))
            cons.append(C(e, "<=", [F(rnd.randint(1, 8), 4)]))
            cons.append(C(tuple(-v for v in e), "<=", [F(rnd.randint(0, 8), 4)]))
        X = make_set([cons], n)
        m = 40 if n == 2 else 16
        approx = F(count_lattice(X, m), m ** n)
        assert abs(approx - euclid_volume(X)) <= F(20 * n, m)
