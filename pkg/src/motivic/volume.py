"""Classes of bounded polytopes in the dimension-free ring.

A class-valued function of the coordinates (gamma_1..gamma_k, x_1..x_n) is a
GRingElem of dimension k+n.  Integrating coordinate s over [a, b) is exact:

* a divisibility factor depending on s is removed by reparametrizing s;
* i(s)^k alone integrates to S_k(i(b)) - S_k(i(a)) with S_k the Faulhaber
  polynomial sum_{j<N} j^k;
* factors i(beta s + d) with 0 < beta < 1 are peeled off by summation by
  parts.  The correction integrals have a strictly smaller common
  denominator of slopes, so the recursion terminates.

The class of a cell is obtained by integrating out the last coordinate over
every (lower bound, upper bound) pair, with ties broken so the pieces are
disjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import sympy

from .gamma import GammaScalar, lattice_hnf
from .gring import (GRingElem, _epart, _epart_depends, c_binomial, psi_hom,
                    unit, x_symbols)
from .polytope import (EQ, GE, GT, DefinableSet, _subst_eq, check_order_consistent, is_bounded,
                       is_empty, lower_upper, simplify)

ZERO = Fraction(0)
ONE = Fraction(1)


def _vec(a) -> tuple:
    return tuple(x if isinstance(x, Fraction) else Fraction(x) for x in a)


@lru_cache(maxsize=None)
def faulhaber(k: int) -> tuple:
    """Coefficients c_0.. of S_k(N) = sum_{0<=j<N} j^k, lowest degree first."""
    N, j = sympy.symbols("N j", integer=True)
    poly = sympy.Poly(sympy.expand(sympy.summation(j ** k, (j, 0, N - 1))), N)
    coeffs = [Fraction(0)] * (poly.degree() + 1)
    for (d,), c in poly.terms():
        coeffs[d] = Fraction(int(c.p), int(c.q))
    return tuple(coeffs)


def _poly_at(coeffs: Sequence[Fraction], x: GRingElem) -> GRingElem:
    out = GRingElem(x.dim)
    for c in reversed(coeffs):
        out = out * x + c if c else out * x
    return out


def power_sum(k: int, x: GRingElem) -> GRingElem:
    return _poly_at(faulhaber(k), x)


# -- exact integration over one coordinate ----------------------------------

def _split_epart(e, s: int, r: int):
    """Reduce the e-part with s as leading column.

    Returns (p, dstar, rest): e(row0) = e(s/p + dstar.z) and rest is the
    canonical e-part of the remaining rows (which do not involve s).
    """
    order = [s] + [i for i in range(r) if i != s]
    perm_rows = tuple(tuple(row[i] for i in order) for row in e)
    h = lattice_hnf(perm_rows, r)
    back = [0] * r
    for pos, i in enumerate(order):
        back[i] = pos
    rows = [tuple(row[back[i]] for i in range(r)) for row in h]
    row0 = rows[0]
    p = 1 / row0[s]
    dstar = tuple(ZERO if i == s else x for i, x in enumerate(row0))
    rest = _epart(tuple(row for row in rows[1:] if any(row)), r)
    return int(p), dstar, rest


def integrate(u: GRingElem, s: int, a: Sequence, b: Sequence) -> GRingElem:
    """Exact class of the integral of u over s in [a, b) (signed if b < a).

    a and b are linear forms in the other coordinates.
    """
    a, b = _vec(a), _vec(b)
    if a[s] or b[s]:
        raise ValueError("limits may not involve the integration variable")
    r = u.dim
    out = GRingElem(r)
    if a == b:
        return out
    for (e, args), c in u.terms.items():
        out = out + _integrate_monomial(e, args, s, a, b, r) * c
    return out


@lru_cache(maxsize=200_000)
def _integrate_monomial(e, args, s, a, b, r) -> GRingElem:
    if e is not None and _epart_depends(e, s):
        p, dstar, rest = _split_epart(e, s, r)

        # s = p*u - p*dstar.z turns e(s/p + dstar.z) into e(u) = point weight
        def sub(vec):
            cs = vec[s]
            if not cs:
                return vec
            out = [x - cs * p * d for x, d in zip(vec, dstar)]
            out[s] = cs * p
            return tuple(out)

        integrand = GRingElem(r, {(rest, ()): ONE})
        for arg in args:
            integrand = integrand * GRingElem.iota(sub(arg))
        lo = tuple(x / p + d for x, d in zip(a, dstar))
        hi = tuple(x / p + d for x, d in zip(b, dstar))
        return integrate(integrand, s, lo, hi)

    us = unit(r, s)
    k = 0
    frac = []
    consts = []
    for arg in args:
        if arg == us:
            k += 1
        elif arg[s]:
            frac.append(arg)
        else:
            consts.append(arg)
    C = GRingElem(r, {(e, tuple(consts)): ONE})
    ia, ib = GRingElem.iota(a), GRingElem.iota(b)
    if not frac:
        return C * (power_sum(k, ib) - power_sum(k, ia))

    def at(vec, point):
        cs = vec[s]
        return tuple(ZERO if i == s else x + cs * y for i, (x, y) in enumerate(zip(vec, point)))

    def boundary(point, ip):
        val = power_sum(k, ip)
        for f in frac:
            val = val * GRingElem.iota(at(f, point))
        return val

    total = boundary(b, ib) - boundary(a, ia)
    for j, fj in enumerate(frac):
        beta = fj[s]
        d = tuple(ZERO if i == s else x for i, x in enumerate(fj))

        # x = (y - d) / beta, expressed as forms in the new coordinate y
        def tr(vec):
            cs = vec[s]
            out = [x - cs * dd / beta for x, dd in zip(vec, d)]
            out[s] = cs / beta
            return tuple(out)

        xs = tr(us)
        ix = GRingElem.iota(xs)
        h = power_sum(k, ix) + GRingElem.e(xs) * ix ** k
        for i, fi in enumerate(frac):
            if i == j:
                continue
            fv = tr(fi)
            term = GRingElem.iota(fv)
            if i > j:
                term = term + GRingElem.e(fv)
            h = h * term
        lo = tuple(beta * x + dd for x, dd in zip(a, d))
        hi = tuple(beta * x + dd for x, dd in zip(b, d))
        total = total - integrate(h, s, lo, hi)
    return C * total


def _as_form(point, r: int, var: int | None = None) -> tuple:
    point = _vec(point)
    if len(point) == r:
        return point
    if len(point) > r:
        raise ValueError("limit has too many coordinates")
    return point + (ZERO,) * (r - len(point))


def integrate_fn(f: GRingElem, lower, upper, var: int | None = None) -> GRingElem:
    """Integral of the function f(t) over [lower, upper).

    t is coordinate `var` (default: the last one); limits are scalars in the
    leading coordinates or full forms.  Reversed limits give the negative.
    When t is the last coordinate it is dropped from the result.
    """
    r = f.dim
    s = r - 1 if var is None else var
    lo, hi = _as_form(lower, r), _as_form(upper, r)
    res = integrate(f, s, lo, hi)
    if res.depends_on(s):
        raise AssertionError("integration variable survived")
    return res.drop_coords(r - 1) if s == r - 1 else res


def graded_integrate(f: GRingElem, lower, upper, degree: int, var: int | None = None) -> GRingElem:
    """Top part of the integral: Riemann integration on psi-images, keeping
    only the terms of filtration degree > degree.  Coordinates are handled
    as in integrate_fn.

    An e-part involving t holds on one residue class of t mod p, so it
    enters with density 1/p rather than with its psi-image 1.
    """
    r = f.dim
    s = r - 1 if var is None else var
    lo, hi = _as_form(lower, r), _as_form(upper, r)
    xs = x_symbols(r)
    weighted = GRingElem(r)
    for (e, args), c in f.terms.items():
        if e is not None and _epart_depends(e, s):
            p_, _, rest = _split_epart(e, s, r)
            weighted = weighted + GRingElem(r, {(rest, args): c / p_})
        else:
            weighted = weighted + GRingElem(r, {(e, args): c})
    p = psi_hom(weighted, xs)
    lin = lambda v: sum(sympy.Rational(c.numerator, c.denominator) * x for c, x in zip(v, xs) if c)
    F = sympy.expand(sympy.integrate(p, (xs[s], lin(lo), lin(hi))))
    res = from_polynomial(F, xs, r, min_degree=degree + 1)
    return res.drop_coords(r - 1) if s == r - 1 else res


def from_polynomial(expr, xs, r: int, min_degree: int = 0) -> GRingElem:
    """x_i -> i(unit_i), keeping monomials of total degree >= min_degree."""
    out = GRingElem(r)
    if expr == 0:
        return out
    poly = sympy.Poly(expr, *xs)
    for mon, c in poly.terms():
        if sum(mon) < min_degree:
            continue
        args = []
        for i, m in enumerate(mon):
            args += [unit(r, i)] * m
        out = out + GRingElem(r, {(None, tuple(sorted(args))): Fraction(int(c.p), int(c.q))})
    return out


def c_poly(n: int, arg) -> GRingElem:
    """C_n(arg) = binomial(i(arg), n)."""
    return c_binomial(GRingElem.iota(arg), n)


@dataclass(frozen=True)
class StandardTerm:
    """e((t + b)/m) e(b) together with the constant e-part left over."""

    m: int
    b: tuple
    constant: GRingElem

    def as_elem(self, var: int) -> GRingElem:
        r = len(self.b)
        row = tuple(ONE / self.m if i == var else x / self.m for i, x in enumerate(self.b))
        return self.constant * GRingElem.e(row) * GRingElem.e(self.b)


def normalize_fn(factors: Sequence[Sequence], var: int | None = None) -> StandardTerm:
    """Collapse a product of divisibility factors e(form_i) in the variable
    t (coordinate `var`) to constants times one standard term."""
    forms = tuple(_vec(f) for f in factors)
    if not forms:
        raise ValueError("no factors")
    r = len(forms[0])
    s = r - 1 if var is None else var
    e = _epart(forms, r)
    if e is None or not _epart_depends(e, s):
        return StandardTerm(1, (ZERO,) * r, GRingElem(r, {(e, ()): ONE}))
    p, dstar, rest = _split_epart(e, s, r)
    b = tuple(p * x for x in dstar)
    return StandardTerm(p, b, GRingElem(r, {(rest, ()): ONE}))


# -- classes of sets --------------------------------------------------------

@dataclass(frozen=True)
class Piece:
    """One region of the fibering: where `lower`/`upper` are the active
    bounds of the eliminated coordinate."""

    region: tuple
    lower: tuple
    upper: tuple
    lower_open: bool
    upper_open: bool


def _bound_form(vec, v: int, sign: int) -> tuple:
    c = vec[v]
    return tuple(ZERO if i == v else sign * x / abs(c) for i, x in enumerate(vec))


def _tie_kind(mine_strict: bool, other_strict: bool, other_before: bool) -> str:
    if mine_strict != other_strict:
        return GE if mine_strict else GT
    return GT if other_before else GE


def fiber_pieces(cons: list, v: int, k: int) -> list:
    lo, up, rest = lower_upper(cons, v, k)
    if not lo or not up:
        raise ValueError("unbounded set")
    lows = [(_bound_form(vec, v, -1), kind == GT) for vec, kind in lo]
    ups = [(_bound_form(vec, v, 1), kind == GT) for vec, kind in up]
    out = []
    for i, (L, lstrict) in enumerate(lows):
        for j, (U, ustrict) in enumerate(ups):
            region = list(rest)
            for i2, (L2, l2strict) in enumerate(lows):
                if i2 != i:
                    diff = tuple(x - y for x, y in zip(L, L2))
                    region.append((diff, _tie_kind(lstrict, l2strict, i2 < i)))
            for j2, (U2, u2strict) in enumerate(ups):
                if j2 != j:
                    diff = tuple(y - x for x, y in zip(U, U2))
                    region.append((diff, _tie_kind(ustrict, u2strict, j2 < j)))
            gap = tuple(y - x for x, y in zip(L, U))
            region.append((gap, GT if (lstrict or ustrict) else GE))
            region = simplify(region, k)
            if region is None or is_empty(region, k):
                continue
            out.append(Piece(tuple(region), L, U, lstrict, ustrict))
    return out


def _class_rec(cons: list, v: int, integrand: GRingElem, k: int) -> GRingElem:
    if v < k:
        return integrand
    for idx, (vec, kind) in enumerate(cons):
        if kind == EQ and vec[v]:
            phi = _bound_form(vec, v, -1 if vec[v] > 0 else 1)
            rest = simplify(_subst_eq(cons[:idx] + cons[idx + 1:], vec, v), k)
            if rest is None:
                return GRingElem(integrand.dim)
            return _class_rec(rest, v - 1, integrand.restrict(v, phi), k)
    total = GRingElem(integrand.dim)
    for pc in fiber_pieces(cons, v, k):
        fiber = integrate(integrand, v, pc.lower, pc.upper)
        if not pc.upper_open:
            fiber = fiber + integrand.restrict(v, pc.upper)
        if pc.lower_open:
            fiber = fiber - integrand.restrict(v, pc.lower)
        total = total + _class_rec(list(pc.region), v - 1, fiber, k)
    return total


def class_pieces(cons: list, v: int, integrand: GRingElem, stop: int, k: int) -> list:
    """Integrate out coordinates v, v-1, .., stop+1 only.

    Returns (region, value) pairs: disjoint regions over the coordinates up
    to `stop` and the class-valued function on each.
    """
    if v <= stop:
        return [(list(cons), integrand)]
    for idx, (vec, kind) in enumerate(cons):
        if kind == EQ and vec[v]:
            phi = _bound_form(vec, v, -1 if vec[v] > 0 else 1)
            rest = simplify(_subst_eq(cons[:idx] + cons[idx + 1:], vec, v), k)
            if rest is None:
                return []
            return class_pieces(rest, v - 1, integrand.restrict(v, phi), stop, k)
    out = []
    for pc in fiber_pieces(cons, v, k):
        fiber = integrate(integrand, v, pc.lower, pc.upper)
        if not pc.upper_open:
            fiber = fiber + integrand.restrict(v, pc.upper)
        if pc.lower_open:
            fiber = fiber - integrand.restrict(v, pc.lower)
        out.extend(class_pieces(list(pc.region), v - 1, fiber, stop, k))
    return out


def interval_of(region: list, v: int, k: int):
    """Read a region in the single free coordinate v as an interval.

    Returns (lo, lo_open, hi, hi_open) with lo/hi scalar forms or None for
    an unbounded end; a point comes back as (c, False, c, False).
    """
    lo = hi = None
    lo_open = hi_open = False
    for vec, kind in region:
        c = vec[v]
        if any(vec[i] for i in range(k, len(vec)) if i != v):
            raise ValueError("region involves more than one free coordinate")
        val = tuple(-x / c for x in vec[:k])
        if kind == EQ:
            return val, False, val, False
        if c > 0:
            if lo is None or val > lo or (val == lo and kind == GT):
                lo, lo_open = val, kind == GT
        else:
            if hi is None or val < hi or (val == hi and kind == GT):
                hi, hi_open = val, kind == GT
    return lo, lo_open, hi, hi_open


def class_of_cell(cons: list, k: int, n: int) -> GRingElem:
    r = k + n
    cons = simplify(cons, k)
    if cons is None or is_empty(cons, k):
        return GRingElem.zero(k)
    res = _class_rec(cons, r - 1, GRingElem.const(r), k)
    return res.drop_coords(k)


def class_of(X: DefinableSet) -> GRingElem:
    """[X] in the dimension-free ring over the k value-group generators."""
    if not is_bounded(X):
        raise ValueError("unbounded set")
    total = GRingElem.zero(X.rank)
    for cell in X.cells:
        total = total + class_of_cell(cell.internal(), X.rank, X.ambient)
    return total


def check_spec_for_class(X: DefinableSet, u: GRingElem, spec) -> None:
    """Order-consistency of spec for the whole computation, not only for the
    right-hand sides: fibering creates breakpoint differences (the i-arguments
    of the class) whose lexicographic sign must survive specialization."""
    check_order_consistent(X, spec)
    spec = [Fraction(s) for s in spec]
    for _, args in u.terms:
        for a in args:
            lex = next((1 if x > 0 else -1 for x in a if x), 0)
            val = sum(x * s for x, s in zip(a, spec))
            if (val > 0) - (val < 0) != lex:
                raise ValueError(f"specialization flips the sign of {list(a)}")


def leading_volume(cls: GRingElem, n: int, spec) -> Fraction:
    """psi of the degree-n part of a class, at x_i = spec_i."""
    xs = x_symbols(cls.dim)
    top = GRingElem(cls.dim, {key: c for key, c in cls.terms.items() if len(key[1]) == n})
    val = psi_hom(top, xs).subs({x: sympy.Rational(Fraction(sv).numerator, Fraction(sv).denominator)
                                 for x, sv in zip(xs, spec)})
    val = sympy.Rational(val)
    return Fraction(int(val.p), int(val.q))
