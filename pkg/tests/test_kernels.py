import os
import random
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from motivic import _pykernels, kernels
from motivic.hecke import field_tables

try:
    from motivic import _kernels
except ImportError:
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def brute_count(levels, n, box=60):
    """Membership tests only, pruning each level once its coordinates are fixed."""

    def rec(prefix):
        j = len(prefix)
        if j == n:
            return 1
        total = 0
        for t in range(-box, box + 1):
            y = prefix + [t] + [0] * (n - j - 1)
            if all(v[0] + sum(a * c for a, c in zip(v[1:], y)) >= 0 for v in levels[j]):
                total += rec(prefix + [t])
        return total

    return rec([])


def random_levels(rnd, n):
    levels = []
    for j in range(n):
        lvl = []
        for sign in (1, -1):
            a = [rnd.randint(-2, 2) for _ in range(j)] + [sign * rnd.randint(1, 3)] + [0] * (n - j - 1)
            lvl.append((rnd.randint(0, 6),) + tuple(a))
        levels.append(lvl)
    return levels


@given(st.integers(0, 10**6), st.integers(1, 3))
def test_python_count_levels_matches_brute_force(seed, n):
    levels = random_levels(random.Random(seed), n)
    # |y_j| <= 6 + 2 * (|y_0| + ... + |y_{j-1}|), so 60 covers three levels
    assert _pykernels.count_levels(levels, n) == brute_count(levels, n)


@needs_ext
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_backends_agree_on_count_levels(seed, n):
    levels = random_levels(random.Random(seed), n)
    assert _kernels.count_levels(levels, n) == _pykernels.count_levels(levels, n)


@needs_ext
@pytest.mark.parametrize("q0,vx,vy,length,prec", [(2, 0, 1, 3, 5), (3, -1, -1, 3, 4), (4, 0, 0, 2, 3)])
def test_backends_agree_on_histogram(q0, vx, vy, length, prec):
    add, mul = field_tables(q0)
    for c0 in range(q0):
        args = (add, mul, vx, vy, length, c0, prec)
        assert _kernels.valuation_histogram(*args) == _pykernels.valuation_histogram(*args)


def test_histogram_totals():
    add, mul = field_tables(3)
    hist = _pykernels.valuation_histogram(add, mul, 0, 0, 2, 1, 4)
    assert sum(hist.values()) == 3 ** 4


def test_field_tables_are_fields():
    for q0 in (2, 3, 4):
        add, mul = field_tables(q0)
        for a in range(1, q0):
            assert any(mul[a][b] == 1 for b in range(q0))
        assert all(add[0][b] == b and mul[1][b] == b for b in range(q0))


def test_pure_python_switch():
    env = dict(os.environ, MOTIVIC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from motivic import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    if _kernels is not None and not os.environ.get("MOTIVIC_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"
