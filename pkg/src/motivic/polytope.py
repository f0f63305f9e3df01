"""Bounded piecewise-linear sets and their brute-force oracles.

Internally a constraint is (vec, kind): vec . (gamma_1..gamma_k, x_1..x_n)
compared with 0, kind one of GT (>0), GE (>=0), EQ (=0).  The gamma part is a
parameter: its sign is the lexicographic sign of the coefficient vector.
Feasibility is decided by exact Fourier-Motzkin elimination, which is valid
over any divisible ordered group and so needs no numeric LP.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .gamma import GammaScalar, lex_sign
from . import kernels

GT, GE, EQ = ">", ">=", "="
ZERO = Fraction(0)

_REL_IN = {"<": GT, "<=": GE, "=": EQ}


# -- public data types ------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    """row . x  rel  rhs, with rel in {"<", "<=", "="}."""

    row: tuple
    rel: str
    rhs: GammaScalar

    def __post_init__(self):
        row = tuple(int(v) for v in self.row)
        rhs = GammaScalar(self.rhs)
        rel = self.rel
        if rel in (">", ">="):
            row, rhs, rel = tuple(-v for v in row), -rhs, "<" if rel == ">" else "<="
        if rel not in _REL_IN:
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "row", row)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "rel", rel)

    def internal(self) -> tuple:
        return tuple(self.rhs) + tuple(Fraction(-v) for v in self.row), _REL_IN[self.rel]


@dataclass(frozen=True)
class Cell:
    ambient: int
    constraints: tuple = ()

    def internal(self) -> list:
        return [c.internal() for c in self.constraints]


@dataclass(frozen=True)
class DefinableSet:
    ambient: int
    rank: int
    cells: tuple = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.cells)

    def is_empty(self) -> bool:
        return not self.cells


def from_internal(cons: Sequence, k: int) -> tuple:
    out = []
    for vec, kind in cons:
        var = vec[k:]
        den = 1
        for a in var:
            den = den * a.denominator // math.gcd(den, a.denominator)
        row = tuple(int(-a * den) for a in var)
        rhs = GammaScalar(a * den for a in vec[:k])
        rel = {GT: "<", GE: "<=", EQ: "="}[kind]
        out.append(Constraint(row, rel, rhs))
    return tuple(out)


# -- Fourier-Motzkin core ---------------------------------------------------

def _param_truth(vec, kind, k) -> bool:
    s = lex_sign(vec[:k])
    if kind == GT:
        return s > 0
    if kind == GE:
        return s >= 0
    return s == 0


def _normalize(vec, kind, k):
    """Scale so the leading variable coefficient is +-1.  Returns None for a
    true parameter-only constraint, False for a false one."""
    lead = next((a for a in vec[k:] if a), None)
    if lead is None:
        return None if _param_truth(vec, kind, k) else False
    s = abs(lead)
    if kind == EQ and lead < 0:
        s = lead
    if s != 1:
        vec = tuple(a / s for a in vec)
    return vec, kind


def simplify(cons: Iterable, k: int):
    """Normalize, drop trivial constraints, keep only the tightest of
    parallel inequalities.  Returns None if a constraint is false."""
    best: dict = {}
    eqs: dict = {}
    for vec, kind in cons:
        nc = _normalize(tuple(vec), kind, k)
        if nc is None:
            continue
        if nc is False:
            return None
        vec, kind = nc
        var = vec[k:]
        par = vec[:k]
        if kind == EQ:
            if var in eqs and eqs[var] != par:
                return None
            eqs[var] = par
            continue
        old = best.get(var)
        # smaller parameter part is tighter; on a tie GT beats GE
        if old is None or par < old[0] or (par == old[0] and kind == GT):
            best[var] = (par, kind)
    out = [(par + var, EQ) for var, par in eqs.items()]
    out += [(par + var, kind) for var, (par, kind) in best.items()]
    # an inequality opposite to an equality, or a pair v>=0, -v>=0 ...
    for var, (par, kind) in best.items():
        neg = tuple(-a for a in var)
        if neg in best:
            p2, k2 = best[neg]
            tot = tuple(a + b for a, b in zip(par, p2))
            s = lex_sign(tot)
            if s < 0 or (s == 0 and (kind == GT or k2 == GT)):
                return None
    return out


def _subst_eq(cons, eq_vec, j):
    """Use eq_vec (=0) to eliminate coordinate j from the other constraints."""
    c = eq_vec[j]
    out = []
    for vec, kind in cons:
        a = vec[j]
        if a:
            f = a / c
            vec = tuple(x - f * y for x, y in zip(vec, eq_vec))
        out.append((vec, kind))
    return out


def eliminate(cons: list, j: int, k: int):
    """Project out coordinate j.  Returns None if infeasible."""
    for idx, (vec, kind) in enumerate(cons):
        if kind == EQ and vec[j]:
            rest = cons[:idx] + cons[idx + 1:]
            return simplify(_subst_eq(rest, vec, j), k)
    pos, neg, out = [], [], []
    for vec, kind in cons:
        a = vec[j]
        if a > 0:
            pos.append((vec, kind))
        elif a < 0:
            neg.append((vec, kind))
        else:
            out.append((vec, kind))
    for (p, kp), (q, kq) in itertools.product(pos, neg):
        a, b = p[j], -q[j]
        vec = tuple(x / a + y / b for x, y in zip(p, q))
        out.append((vec, GT if GT in (kp, kq) else GE))
    return simplify(out, k)


def _vars_in(cons, k):
    used = set()
    for vec, _ in cons:
        for j in range(k, len(vec)):
            if vec[j]:
                used.add(j)
    return used


def project(cons, keep: Iterable[int], k: int):
    """Eliminate every variable coordinate not in `keep`."""
    keep = set(keep)
    cur = simplify(cons, k)
    while cur is not None:
        todo = _vars_in(cur, k) - keep
        if not todo:
            return cur

        def cost(j):
            if any(kind == EQ and vec[j] for vec, kind in cur):
                return -1
            p = sum(1 for vec, _ in cur if vec[j] > 0)
            n = sum(1 for vec, _ in cur if vec[j] < 0)
            return p * n - p - n

        j = min(sorted(todo), key=cost)
        cur = eliminate(cur, j, k)
    return None


def is_empty(cons, k: int) -> bool:
    return project(list(cons), (), k) is None


def negate(vec, kind) -> list:
    neg = tuple(-a for a in vec)
    if kind == GT:
        return [(neg, GE)]
    if kind == GE:
        return [(neg, GT)]
    return [(vec, GT), (neg, GT)]


def remove_redundant(cons, k: int) -> list:
    cur = list(cons)
    i = 0
    while i < len(cur):
        vec, kind = cur[i]
        if kind != EQ:
            others = cur[:i] + cur[i + 1:]
            if all(is_empty(others + [nc], k) for nc in negate(vec, kind)):
                cur = others
                continue
        i += 1
    return cur


def lower_upper(cons, j: int, k: int):
    """Split constraints by the sign of their coefficient at coordinate j."""
    lo, up, rest = [], [], []
    for vec, kind in cons:
        a = vec[j]
        if a > 0:
            lo.append((vec, kind))
        elif a < 0:
            up.append((vec, kind))
        else:
            rest.append((vec, kind))
    return lo, up, rest


# -- set operations ---------------------------------------------------------

def _rank_of(cells) -> int:
    for c in cells:
        for con in c.constraints:
            return len(con.rhs)
    return 1


def normalize(raw: Iterable[Cell], rank: int | None = None) -> DefinableSet:
    """Disjoint cells with the same union; empty cells dropped."""
    raw = list(raw)
    if not raw:
        return DefinableSet(0, rank or 1, ())
    n = raw[0].ambient
    k = rank or _rank_of(raw)
    done: list = []
    for cell in raw:
        if cell.ambient != n:
            raise ValueError("cells live in different ambient spaces")
        start = simplify(cell.internal(), k)
        if start is None or is_empty(start, k):
            continue
        pieces = [start]
        for prev in done:
            nxt = []
            for piece in pieces:
                nxt.extend(_difference(piece, prev, k))
            pieces = nxt
        for p in pieces:
            done.append(remove_redundant(p, k))
    cells = tuple(Cell(n, from_internal(c, k)) for c in done)
    return DefinableSet(n, k, cells)


def _difference(piece, other, k) -> list:
    """piece minus other, as disjoint nonempty cells."""
    if is_empty(piece + other, k):
        return [piece]
    out = []
    prefix: list = []
    for vec, kind in other:
        for nc in negate(vec, kind):
            cand = simplify(piece + prefix + [nc], k)
            if cand is not None and not is_empty(cand, k):
                out.append(cand)
        prefix.append((vec, kind))
    return out


def make_set(cells: Iterable[Iterable[Constraint]], ambient: int, rank: int = 1) -> DefinableSet:
    return normalize([Cell(ambient, tuple(c)) for c in cells], rank)


def is_bounded(X: DefinableSet) -> bool:
    n, k = X.ambient, X.rank
    for cell in X.cells:
        cone = []
        for vec, kind in cell.internal():
            cone.append(((ZERO,) * k + tuple(vec[k:]), EQ if kind == EQ else GE))
        for j in range(n):
            for s in (1, -1):
                probe = (ZERO,) * k + tuple(Fraction(s) if i == j else ZERO for i in range(n))
                if not is_empty(cone + [(probe, GT)], k):
                    return False
    return True


def _cell_dimension(cons, n, k) -> int:
    if is_empty(cons, k):
        return -1
    rows = []
    for vec, kind in cons:
        if kind == EQ:
            rows.append(vec[k:])
        elif kind == GE:
            if is_empty(cons + [(vec, GT)], k):
                rows.append(vec[k:])
    return n - matrix_rank(rows)


def dimension(X: DefinableSet) -> int:
    return max((_cell_dimension(c.internal(), X.ambient, X.rank) for c in X.cells), default=-1)


# -- exact linear algebra ---------------------------------------------------

def row_reduce(rows):
    m = [list(r) for r in rows]
    piv = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], piv


def matrix_rank(rows) -> int:
    rows = [list(map(Fraction, r)) for r in rows]
    if not rows:
        return 0
    return len(row_reduce(rows)[0])


def det(mat) -> Fraction:
    m = [list(map(Fraction, r)) for r in mat]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def solve(a_rows, b):
    """Unique solution of a x = b, or None."""
    n = len(a_rows[0])
    aug = [list(r) + [bi] for r, bi in zip(a_rows, b)]
    red, piv = row_reduce(aug)
    if len(piv) != n or n in piv:
        return None
    return tuple(red[i][n] for i in range(n))


# -- specialization ---------------------------------------------------------

def _spec_value(par, spec) -> Fraction:
    return sum((a * s for a, s in zip(par, spec)), ZERO)


def default_spec(k: int, spec):
    if spec is None:
        if k != 1:
            raise ValueError("rank > 1 needs an explicit specialization")
        return (Fraction(1),)
    spec = tuple(Fraction(s) for s in spec)
    if len(spec) != k:
        raise ValueError("specialization length mismatch")
    return spec


def check_order_consistent(X: DefinableSet, spec) -> None:
    scalars = {tuple([ZERO] * X.rank)}
    for cell in X.cells:
        for c in cell.constraints:
            scalars.add(tuple(c.rhs))
    scalars = sorted(scalars)
    vals = [_spec_value(s, spec) for s in scalars]
    for (a, va), (b, vb) in itertools.combinations(zip(scalars, vals), 2):
        if a != b and not va < vb:
            raise ValueError(f"specialization does not preserve the order of {a} < {b}")


def _specialized(cons, k, spec, scale=1):
    """Numeric constraints over x (one constant coordinate in front)."""
    out = []
    for vec, kind in cons:
        out.append(((_spec_value(vec[:k], spec) * scale,) + tuple(vec[k:]), kind))
    return out


# -- lattice points ---------------------------------------------------------

def _integer_levels(cons, n):
    """Integer constraints a.y + b >= 0 projected level by level."""
    ints = []
    for vec, kind in cons:
        den = 1
        for a in vec:
            den = den * a.denominator // math.gcd(den, a.denominator)
        iv = [int(a * den) for a in vec]
        g = 0
        for a in iv[1:]:
            g = math.gcd(g, a)
        if g == 0:
            ok = iv[0] > 0 if kind == GT else (iv[0] >= 0 if kind == GE else iv[0] == 0)
            if not ok:
                return None
            continue
        if kind == GT:
            iv[0] -= 1
        if kind == EQ:
            ints.append(iv)
            ints.append([-a for a in iv])
        else:
            ints.append(iv)
    levels = [None] * n
    cur = [tuple(_tighten(v)) for v in ints]
    for j in range(n - 1, -1, -1):
        here = [v for v in cur if v[1 + j]]
        rest = [v for v in cur if not v[1 + j]]
        levels[j] = here
        pos = [v for v in here if v[1 + j] > 0]
        neg = [v for v in here if v[1 + j] < 0]
        if not pos or not neg:
            raise ValueError("unbounded set")
        nxt = set(rest)
        for p in pos:
            for q in neg:
                a, b = p[1 + j], -q[1 + j]
                comb = [b * x + a * y for x, y in zip(p, q)]
                if not any(comb[1:]):
                    if comb[0] < 0:
                        return None
                    continue
                nxt.add(tuple(_tighten(comb)))
        cur = list(nxt)
    for v in cur:
        if v[0] < 0:
            return None
    return levels


def _tighten(v):
    g = 0
    for a in v[1:]:
        g = math.gcd(g, a)
    if g > 1:
        # a.y + b >= 0 with g | a  <=>  (a/g).y + floor(b/g) >= 0
        return [v[0] // g] + [a // g for a in v[1:]]
    return list(v)


def count_lattice(X: DefinableSet, m: int, spec=None) -> int:
    if m < 1:
        raise ValueError("m must be positive")
    if not is_bounded(X):
        raise ValueError("unbounded set")
    k, n = X.rank, X.ambient
    spec = default_spec(k, spec)
    check_order_consistent(X, spec)
    total = 0
    for cell in X.cells:
        cons = _specialized(cell.internal(), k, spec, scale=m)
        if n == 0:
            total += int(all(_param_truth(v, kd, 1) for v, kd in cons))
            continue
        levels = _integer_levels(cons, n)
        if levels is None:
            continue
        total += kernels.count_levels(levels, n)
    return total


# -- Euclidean volume -------------------------------------------------------

def _affine_dim(points) -> int:
    pts = list(points)
    if not pts:
        return -1
    p0 = pts[0]
    return matrix_rank([[a - b for a, b in zip(p, p0)] for p in pts[1:]]) if len(pts) > 1 else 0


def _vertices(rows, n):
    """Vertices of {x : c + a.x >= 0 for (c, a) in rows}."""
    verts: dict = {}
    for combo in itertools.combinations(range(len(rows)), n):
        a = [rows[i][1] for i in combo]
        b = [-rows[i][0] for i in combo]
        x = solve(a, b)
        if x is None:
            continue
        if x in verts:
            continue
        if all(c + sum(ai * xi for ai, xi in zip(av, x)) >= 0 for c, av in rows):
            verts[x] = frozenset(i for i, (c, av) in enumerate(rows)
                                 if c + sum(ai * xi for ai, xi in zip(av, x)) == 0)
    return verts


def _simplices(face: frozenset, d: int, tight: dict, memo: dict):
    key = face
    if key in memo:
        return memo[key]
    if d == 0:
        res = [[next(iter(face))]]
        memo[key] = res
        return res
    v0 = min(face)
    cons = set()
    for v in face:
        cons |= tight[v]
    facets = set()
    for c in cons:
        g = frozenset(v for v in face if c in tight[v])
        if g != face and v0 not in g and g not in facets and _affine_dim(g) == d - 1:
            facets.add(g)
    res = []
    for g in facets:
        for t in _simplices(g, d - 1, tight, memo):
            res.append([v0] + t)
    memo[key] = res
    return res


def euclid_volume(X: DefinableSet, spec=None) -> Fraction:
    if not is_bounded(X):
        raise ValueError("unbounded set")
    k, n = X.rank, X.ambient
    spec = default_spec(k, spec)
    total = Fraction(0)
    for cell in X.cells:
        cons = _specialized(cell.internal(), k, spec)
        rows = []
        for vec, kind in cons:
            rows.append((vec[0], vec[1:]))
            if kind == EQ:
                rows.append((-vec[0], tuple(-a for a in vec[1:])))
        if n == 0:
            continue
        verts = _vertices(rows, n)
        if _affine_dim(verts) < n:
            continue
        for simplex in _simplices(frozenset(verts), n, verts, {}):
            p0 = simplex[0]
            total += abs(det([[a - b for a, b in zip(p, p0)] for p in simplex[1:]]))
    return total / math.factorial(n) if n else Fraction(0)


# -- file format ------------------------------------------------------------

def load_polytope(source) -> DefinableSet:
    """Read the JSON polytope format from a path, a JSON string or a dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            doc = json.loads(text)
        else:
            with open(text) as fh:
                doc = json.load(fh)
    n = int(doc["ambient"])
    cells = []
    rank = None
    for c in doc.get("cells", []):
        cons = []
        for con in c["constraints"]:
            rhs = con["rhs"]
            if not isinstance(rhs, list):
                rhs = [rhs]
            rhs = GammaScalar(Fraction(str(v)) for v in rhs)
            rank = rank or len(rhs)
            row = con["row"]
            if len(row) != n:
                raise ValueError("row length differs from ambient dimension")
            cons.append(Constraint(tuple(row), con["rel"], rhs))
        cells.append(Cell(n, tuple(cons)))
    rank = int(doc.get("rank", rank or 1))
    if not cells:
        return DefinableSet(n, rank, ())
    return normalize(cells, rank)


def dump_polytope(X: DefinableSet) -> dict:
    return {
        "ambient": X.ambient,
        "rank": X.rank,
        "cells": [
            {"constraints": [
                {"row": list(c.row), "rel": c.rel, "rhs": [str(a) for a in c.rhs]}
                for c in cell.constraints]}
            for cell in X.cells
        ],
    }


def box(lo: Sequence, hi: Sequence, closed_hi: bool = False, rank: int = 1) -> DefinableSet:
    """Product of [lo_i, hi_i) (or closed) with rational bounds, rank-1 rhs
    unless vectors are given."""
    n = len(lo)
    cons = []
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        l = lo[i] if isinstance(lo[i], (tuple, list)) else [lo[i]] + [0] * (rank - 1)
        h = hi[i] if isinstance(hi[i], (tuple, list)) else [hi[i]] + [0] * (rank - 1)
        cons.append(Constraint(e, ">=", GammaScalar(l)))
        cons.append(Constraint(e, "<=" if closed_hi else "<", GammaScalar(h)))
    return normalize([Cell(n, tuple(cons))], rank)
