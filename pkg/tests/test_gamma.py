import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from motivic.gamma import (BaseGroup, GammaScalar, Ordering, compare, format_scalar, frac_int_split,
                           parse_scalar, subgroup_canonical)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def closure_1d(gens):
    """Enumerate the subgroup of Q/Z generated by gens (rank 1)."""
    seen = {F(0)}
    frontier = [F(0)]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = (x + g) % 1
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def test_compare_examples():
    assert compare((1, 0), (0, 5)) is Ordering.GREATER
    a = (F(3, 2), F(-1))
    assert compare(a, a) is Ordering.EQUAL
    assert compare((0, F(1, 2)), (0, F(1, 3))) is Ordering.GREATER


def test_compare_rank_mismatch():
    with pytest.raises(ValueError):
        compare((1,), (1, 2))


@pytest.mark.parametrize("a, f, z", [(F(7, 3), F(1, 3), 2), (F(-1, 2), F(1, 2), -1), (F(4), F(0), 4)])
def test_frac_int_split_examples(a, f, z):
    assert frac_int_split([a]) == (GammaScalar([f]), GammaScalar([z]))


def test_subgroup_examples():
    H = subgroup_canonical([[F(1, 2)], [F(1, 3)]])
    assert H.order == 6
    assert H.generators() == [GammaScalar([F(1, 6)])]
    assert subgroup_canonical([], rank=1).is_trivial()
    H = subgroup_canonical([[F(3, 4)], [F(1, 2)]])
    assert H.order == 4 and H.generators() == [GammaScalar([F(1, 4)])]


def test_subgroup_matches_enumerated_closure():
    pool = [F(n, d) for d in (2, 3, 4, 5, 6) for n in range(1, d)]
    for gens in itertools.combinations(pool, 2):
        H = subgroup_canonical([[g] for g in gens])
        assert H.order == len(closure_1d(gens))


def test_rank_two_subgroup_order():
    H = subgroup_canonical([(F(1, 2), 0), (0, F(1, 2)), (F(1, 2), F(1, 2))])
    assert H.order == 4
    assert H.contains((F(1, 2), F(-3, 2)))
    assert not H.contains((F(1, 4), 0))


def test_scalar_text_round_trip():
    s = GammaScalar([F(7, 3), F(-1, 2)])
    assert format_scalar(s) == "[7/3,-1/2]"
    assert parse_scalar("[7/3, -1/2]") == s


def test_base_group_rank():
    with pytest.raises(ValueError):
        BaseGroup(0)
    G = BaseGroup(2)
    assert G.generator(1) == GammaScalar([0, 1])
    with pytest.raises(ValueError):
        G.scalar(1)


@given(st.lists(rationals, min_size=2, max_size=2), st.lists(rationals, min_size=2, max_size=2),
       st.lists(rationals, min_size=2, max_size=2))
def test_order_is_total_and_translation_invariant(a, b, c):
    ab = compare(a, b)
    assert compare(b, a).value == -ab.value
    ac = [x + y for x, y in zip(a, c)]
    bc = [x + y for x, y in zip(b, c)]
    assert compare(ac, bc) is ab


@given(st.lists(rationals, min_size=1, max_size=3))
def test_split_reassembles(a):
    f, z = frac_int_split(a)
    assert all(0 <= x < 1 for x in f)
    assert all(x.denominator == 1 for x in z)
    assert [x + y for x, y in zip(f, z)] == list(a)


gens1 = st.lists(st.lists(rationals, min_size=1, max_size=1), max_size=4)


@given(gens1, st.randoms(use_true_random=False))
def test_canonical_order_independent_and_idempotent(gens, rnd):
    H = subgroup_canonical(gens, rank=1)
    shuffled = list(gens)
    rnd.shuffle(shuffled)
    assert subgroup_canonical(shuffled, rank=1) == H
    assert subgroup_canonical(H.generators(), rank=1) == H


@given(gens1, st.integers(-5, 5))
def test_canonical_ignores_integral_generators(gens, z):
    assert subgroup_canonical(gens + [[F(z)]], rank=1) == subgroup_canonical(gens, rank=1)


@given(gens1)
def test_rank_one_order_is_lcm_of_denominators(gens):
    H = subgroup_canonical(gens, rank=1)
    expected = 1
    for (g,) in gens:
        expected = expected * g.denominator // math.gcd(expected, g.denominator)
    assert H.order == expected
