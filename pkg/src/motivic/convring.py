"""The convolution ring of class-valued functions on the value group.

An element is a finite sum of terms

    coefficient * q(shift) * T_1 * ... * T_r * prod (1 - q(M_i a0))^(-e_i)

where each tail T = Tail(m, lo, hi, W) stands for the function
int_{s in [lo, hi)} q(m s) W(s) ds.  W is a class-valued function of s (a
GRingElem with s as the last coordinate, None meaning 1); hi=None gives the
unbounded theta tails and lo=None the negative-direction ones.

Coefficients store the class of the fibre at the shift, so they always carry
e(shift); with that convention q(a) q(b) is just "multiply coefficients and
add shifts".  Products of tails stay formal.  `collapse` rewrites them as
single tails by integrating out the fibre, and `pointwise_eval` evaluates
them with the volume engine.

psi_star sends an element to a rational function of theta, the q^a and the
x_i.  For one tail it is read off from lattice sums: at mesh 1/N with N
divisible by every denominator involved, the value at lo + j/N is a
quasi-polynomial in j, and summing r^(m j) times it gives a rational function
of r = 1 - 1/theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Sequence

import sympy

from .gamma import GammaScalar, parse_scalar
from .gring import (Comparison, ExprParser, GRingElem, _epart, count_hom,
                    psi_hom, x_symbols)
from .polytope import EQ, GE, GT
from .ratfn import RatFn, q_symbols
from .volume import _class_rec, class_pieces, integrate, interval_of

ZERO = Fraction(0)
ONE = Fraction(1)
THETA = sympy.Symbol("theta")


def _scalar(b, k: int) -> tuple:
    if isinstance(b, (int, Fraction)):
        b = (b,) + (0,) * (k - 1)
    b = tuple(Fraction(x) for x in b)
    if len(b) != k:
        raise ValueError(f"expected a scalar of rank {k}")
    return b


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _smul(c, a):
    return tuple(c * x for x in a)


def _qpow(b, qs):
    out = sympy.Integer(1)
    for x, q in zip(b, qs):
        if x:
            out *= q ** sympy.Rational(x.numerator, x.denominator)
    return out


# -- moving coordinates of class-valued functions ----------------------------

def _remap(W: GRingElem, r: int, f) -> GRingElem:
    """Apply the linear map f (old vector -> new vector of length r) to all
    arguments and e-rows, renormalizing."""
    out = GRingElem(r)
    cache: dict = {}
    for (e, args), c in W.terms.items():
        ee = None
        if e is not None:
            ee = _epart(tuple(v for v in (f(row) for row in e) if any(v)), r)
        term = GRingElem(r, {(ee, ()): c})
        for a in args:
            na = f(a)
            if na not in cache:
                cache[na] = GRingElem.iota(na)
            term = term * cache[na]
        out = out + term
    return out


def _place(W: GRingElem | None, k: int, pos: int, r: int) -> GRingElem:
    """Embed a function of (gamma, s) into r coordinates with s at pos."""
    if W is None:
        return GRingElem.const(r)

    def f(a):
        out = list(a[:k]) + [ZERO] * (r - k)
        out[pos] += a[k]
        return tuple(out)
    return _remap(W, r, f)


def _shift_arg(W: GRingElem, k: int, delta) -> GRingElem:
    """s -> s - delta in a function of (gamma, s)."""
    def f(a):
        return tuple(x - a[k] * d for x, d in zip(a[:k], delta)) + (a[k],)
    return _remap(W, k + 1, f)


def _const_fn(c: GRingElem, k: int) -> GRingElem:
    return c.embed(k + 1)


# -- elements ----------------------------------------------------------------

@dataclass(frozen=True)
class Tail:
    """int_{s in [lo, hi)} q(m s) W(s) ds; None ends are infinite."""

    m: int
    lo: tuple | None
    hi: tuple | None
    weight: GRingElem | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("tail multiplier must be a positive integer")
        if self.lo is None and self.hi is None:
            raise ValueError("a tail needs at least one finite end")

    def key(self):
        w = "" if self.weight is None else str(self.weight)
        return (self.m, self.lo is None, self.lo or (), self.hi is None, self.hi or (), w)

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None

    def degree(self) -> int:
        return 0 if self.weight is None else max(self.weight.degree(), 0)

    def s_degree(self) -> int:
        """Number of i-factors that involve the integration variable."""
        if self.weight is None:
            return 0
        k = self.weight.dim - 1
        return max((sum(1 for a in args if a[k]) for (_, args) in self.weight.terms), default=0)

    def __str__(self):
        from .gamma import format_scalar
        lo = "-inf" if self.lo is None else format_scalar(self.lo)
        hi = "inf" if self.hi is None else format_scalar(self.hi)
        w = "" if self.weight is None else f", {self.weight}"
        return f"T[{self.m}; {lo}, {hi}{w}]"


class ConvRing:
    """Parameters shared by elements: rank, the positive a0, and whether the
    localization at (1 - q(M a0)) or divisible mode are switched on."""

    def __init__(self, rank: int = 1, a0=None, localized: bool = False, divisible: bool = False):
        self.rank = rank
        self.a0 = _scalar(a0 if a0 is not None else (1,) + (0,) * (rank - 1), rank)
        if GammaScalar(self.a0).sign() <= 0:
            raise ValueError("a0 must be positive")
        self.localized = localized
        self.divisible = divisible

    def __repr__(self):
        return f"ConvRing(rank={self.rank}, a0={self.a0}, localized={self.localized}, divisible={self.divisible})"

    @property
    def zero_shift(self) -> tuple:
        return (ZERO,) * self.rank

    def elem(self, terms: dict) -> "ConvElem":
        return ConvElem(self, terms)

    def zero(self) -> "ConvElem":
        return ConvElem(self, {})

    def const(self, c=1) -> "ConvElem":
        if not isinstance(c, GRingElem):
            c = GRingElem.const(self.rank, c)
        return ConvElem(self, {(self.zero_shift, (), ()): c})

    def one(self) -> "ConvElem":
        return self.const(1)

    def q(self, b) -> "ConvElem":
        b = _scalar(b, self.rank)
        return ConvElem(self, {(b, (), ()): GRingElem.e(b)})

    def tail(self, m: int, lo, hi=None, weight: GRingElem | None = None) -> "ConvElem":
        lo = None if lo is None else _scalar(lo, self.rank)
        hi = None if hi is None else _scalar(hi, self.rank)
        if weight is not None and weight.dim != self.rank + 1:
            raise ValueError("tail weight must be a function of (gamma, s)")
        if lo is not None and hi is not None:
            if lo == hi:
                return self.zero()
            if hi < lo:
                return -self.tail(m, hi, lo, weight)
        t = Tail(m, lo, hi, weight)
        return ConvElem(self, {(self.zero_shift, (t,), ()): GRingElem.const(self.rank)})

    def theta(self, m: int = 1, b=0) -> "ConvElem":
        """theta_{m,b} = int_{t >= b} q(m t) dt."""
        return self.tail(m, b, None)

    def theta_neg(self, m: int = 1, b=0) -> "ConvElem":
        """theta^-_{m,b} = int_{t < b} q(m t) dt."""
        return self.tail(m, None, b)

    def Q(self, m: int, b) -> "ConvElem":
        """Q_m(b) = int_0^b q(m t) dt (signed)."""
        return self.tail(m, 0, b)

    def inverse_factor(self, M: int, e: int = 1) -> "ConvElem":
        """(1 - q(M a0))^(-e); needs the localized ring."""
        if not self.localized:
            raise ValueError("localization at (1 - q(M a0)) is not enabled on this ring")
        if M < 1:
            raise ValueError("M must be a positive integer")
        return ConvElem(self, {(self.zero_shift, (), ((M, e),)): GRingElem.const(self.rank)})


def _merge_den(d1, d2):
    out = dict(d1)
    for M, e in d2:
        out[M] = out.get(M, 0) + e
    return tuple(sorted((M, e) for M, e in out.items() if e))


class ConvElem:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: ConvRing, terms: dict):
        self.ring = ring
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}

    def _coerce(self, other):
        if isinstance(other, ConvElem):
            if other.ring is not self.ring:
                raise ValueError("elements belong to different ring instances")
            return other
        if isinstance(other, (int, Fraction, GRingElem)):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for key, c in other.terms.items():
            t[key] = t[key] + c if key in t else c
        return ConvElem(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return ConvElem(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t: dict = {}
        for (b1, t1, d1), c1 in self.terms.items():
            for (b2, t2, d2), c2 in other.terms.items():
                key = (_add(b1, b2), tuple(sorted(t1 + t2, key=Tail.key)), _merge_den(d1, d2))
                c = c1 * c2
                t[key] = t[key] + c if key in t else c
        return ConvElem(self.ring, t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        """Structural equality; use `equal` for equality in the ring."""
        if not isinstance(other, ConvElem):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def is_bounded(self) -> bool:
        return all(t.bounded for (_, tails, den) in self.terms for t in tails) and not any(
            den for (_, _, den) in self.terms)

    def __repr__(self):
        return f"ConvElem({self})"

    def __str__(self):
        from .gamma import format_scalar
        if not self.terms:
            return "0"
        parts = []
        for (b, tails, den), c in sorted(self.terms.items(), key=lambda kv: str(kv[0])):
            bits = [f"({c})"]
            if any(b):
                bits.append(f"q({format_scalar(b)})")
            bits += [str(t) for t in tails]
            bits += [f"(1-q({M}a0))^-{e}" for M, e in den]
            parts.append("*".join(bits))
        return " + ".join(parts)


def convolve(f: ConvElem, g: ConvElem) -> ConvElem:
    return f * g


# -- pointwise values --------------------------------------------------------

def _tail_cons(tails, k: int, r: int) -> list:
    cons = []
    for i, t in enumerate(tails):
        pos = k + i
        if t.lo is not None:
            v = [-x for x in t.lo] + [ZERO] * (r - k)
            v[pos] = ONE
            cons.append((tuple(v), GE))
        if t.hi is not None:
            v = list(t.hi) + [ZERO] * (r - k)
            v[pos] = -ONE
            cons.append((tuple(v), GT))
    return cons


def fiber_value(tails, delta, k: int) -> GRingElem:
    """Value at delta of the formal product of tails (no shift)."""
    delta = tuple(delta)
    if not tails:
        return GRingElem.const(k) if not any(delta) else GRingElem.zero(k)
    n = len(tails)
    r = k + n
    cons = _tail_cons(tails, k, r)
    eq = [-x for x in delta] + [Fraction(t.m) for t in tails]
    cons.append((tuple(eq), EQ))
    integrand = GRingElem.const(r)
    for i, t in enumerate(tails):
        integrand = integrand * _place(t.weight, k, k + i, r)
    try:
        val = _class_rec(cons, r - 1, integrand, k)
    except ValueError as exc:
        raise ValueError("fibre is unbounded; tails with opposite directions cannot be multiplied") from exc
    return val.drop_coords(k)


def _term_floor(b, tails, k):
    """Lower end of the support of q(b) * tails, or None if unbounded below."""
    low = b
    for t in tails:
        if t.lo is None:
            return None
        low = _add(low, _smul(t.m, t.lo))
    return low


def _den_shifts(den, a0, room, max_terms: int = 100_000):
    """(shift, multiplicity) of the expanded denominators, shifts <= room."""
    if not den:
        yield (ZERO,) * len(a0), 1
        return
    lead = next(i for i, x in enumerate(a0) if x)
    if any(x > 0 for x in room[:lead]):
        raise ValueError("pointwise value is an infinite sum")
    Ms = [M for M, _ in den]
    es = [e for _, e in den]

    def ok(j):
        return _smul(j, a0) <= room

    bounds = []
    for M in Ms:
        j = 0
        while ok(M * (j + 1)):
            j += 1
            if j > max_terms:
                raise ValueError("pointwise value is an infinite sum")
        bounds.append(j)
    for js in iproduct(*(range(bd + 1) for bd in bounds)):
        total = sum(M * j for M, j in zip(Ms, js))
        if not ok(total):
            continue
        mult = 1
        for j, e in zip(js, es):
            mult *= math.comb(j + e - 1, e - 1)
        yield _smul(total, a0), mult


def pointwise_eval(f: ConvElem, gamma) -> GRingElem:
    """The class of the fibre of f over gamma (carries e(gamma))."""
    k = f.ring.rank
    gamma = _scalar(gamma, k)
    total = GRingElem.zero(k)
    for (b, tails, den), c in f.terms.items():
        low = _term_floor(b, tails, k)
        if den and low is None:
            raise ValueError("cannot expand a denominator against a negative tail")
        room = _sub(gamma, low) if low is not None else None
        if low is not None and room < (ZERO,) * k:
            continue
        for sh, mult in _den_shifts(den, f.ring.a0, room):
            delta = _sub(_sub(gamma, b), sh)
            val = fiber_value(tails, delta, k)
            if not val.is_zero():
                total = total + c * val * mult
    return total


def count_at(f: ConvElem, gamma, m: int = 1, spec=None) -> Fraction:
    return count_hom(pointwise_eval(f, gamma), m, spec)


# -- collapsing formal tail products -----------------------------------------

def _tails_to_single(tails, k: int) -> list:
    """Rewrite a product of tails as a list of (shift, coefficient, tail)
    with at most one tail (tail None for point masses)."""
    n = len(tails)
    r = k + 1 + n
    t_pos = k
    cons = []
    for i, t in enumerate(tails):
        pos = k + 1 + i
        if t.lo is not None:
            v = [-x for x in t.lo] + [ZERO] * (r - k)
            v[pos] = ONE
            cons.append((tuple(v), GE))
        if t.hi is not None:
            v = list(t.hi) + [ZERO] * (r - k)
            v[pos] = -ONE
            cons.append((tuple(v), GT))
    eq = [ZERO] * r
    eq[t_pos] = -ONE
    for i, t in enumerate(tails):
        eq[k + 1 + i] = Fraction(t.m)
    cons.append((tuple(eq), EQ))
    integrand = GRingElem.const(r)
    for i, t in enumerate(tails):
        integrand = integrand * _place(t.weight, k, k + 1 + i, r)
    out = []
    for region, val in class_pieces(cons, r - 1, integrand, t_pos, k):
        W = val.drop_coords(k + 1)
        out.extend(_interval_terms(region, W, k, t_pos, 1))
    return out


def _interval_terms(region, W: GRingElem, k: int, pos: int, m: int) -> list:
    """Terms for int over a region of s (coordinate pos) of q(m s) W(s)."""
    lo, lo_open, hi, hi_open = interval_of(region, pos, k)

    def point(p):
        val = W.restrict(pos, tuple(p) + (ZERO,) * (W.dim - k)).drop_coords(k)
        return (_smul(m, p), val * GRingElem.e(_smul(m, p)), None)

    if lo is not None and lo == hi:
        return [point(lo)]
    if lo is None and not region:
        raise ValueError("region is unbounded in both directions")
    out = [((ZERO,) * k, GRingElem.const(k), Tail(m, lo, hi, None if W == GRingElem.const(W.dim) else W))]
    if lo is not None and lo_open:
        sh, val, _ = point(lo)
        out.append((sh, -val, None))
    if hi is not None and not hi_open:
        out.append(point(hi))
    return out


def collapse(f: ConvElem) -> ConvElem:
    """Equal element with at most one tail per term (multiplier 1 on merged
    products)."""
    ring = f.ring
    k = ring.rank
    t: dict = {}

    def put(key, c):
        t[key] = t[key] + c if key in t else c

    for (b, tails, den), c in f.terms.items():
        if len(tails) <= 1:
            put((b, tails, den), c)
            continue
        for sh, coef, tail in _tails_to_single(tails, k):
            key = (_add(b, sh), () if tail is None else (tail,), den)
            cc = c * coef
            if any(key[0]):
                cc = cc * GRingElem.e(key[0])
            put(key, cc)
    return ConvElem(ring, t)


# -- psi_star ----------------------------------------------------------------

class ThetaPoly(RatFn):
    """Rational function of theta, x_1..x_k and q_1..q_k."""

    HEAD = (THETA,)

    def __init__(self, head, k: int, D: int, frac):
        super().__init__(head, k, D, frac)

    @classmethod
    def make(cls, k: int, D: int, frac) -> "ThetaPoly":
        return cls(cls.HEAD, k, D, frac)

    @classmethod
    def from_expr(cls, expr, head=None, k: int = 1) -> "ThetaPoly":
        if isinstance(head, int):
            head, k = None, head
        return super().from_expr(expr, cls.HEAD if head is None else head, k)


@lru_cache(maxsize=None)
def _eulerian_sum(h: int):
    """sum_{l >= 0} l^h w^l = N(w)/(1-w)^(h+1); returns N's coefficients."""
    w = sympy.Symbol("w")
    expr = 1 / (1 - w)
    for _ in range(h):
        expr = sympy.together(w * sympy.diff(expr, w))
    num = sympy.Poly(sympy.cancel(expr * (1 - w) ** (h + 1)), w)
    return tuple(sympy.Rational(c) for c in reversed(num.all_coeffs()))


def _horner(coeffs, w, one):
    out = one * 0
    for c in reversed(coeffs):
        out = out * w + c
    return out


class _PsiContext:
    def __init__(self, k: int, D: int):
        self.k, self.D = k, D
        self.K, (self.th,), self.xs, self.us = RatFn.gens(ThetaPoly.HEAD, k, D)
        self.one = self.K.one
        self.r = (self.th - 1) / self.th

    def qpow(self, b):
        out = self.one
        for x, u in zip(b, self.us):
            e = x * self.D
            if e.denominator != 1:
                raise AssertionError("exponent denominator not cleared")
            if e:
                out = out * u ** int(e)
        return out

    def lin(self, v):
        out = self.one * 0
        for c, x in zip(v, self.xs):
            if c:
                out = out + x * sympy.Rational(c.numerator, c.denominator)
        return out

    def psi(self, u: GRingElem):
        out = self.one * 0
        for (e, args), c in u.terms.items():
            t = self.one * sympy.Rational(c.numerator, c.denominator)
            for a in args:
                t = t * self.lin(a)
            out = out + t
        return out

    def ray(self, m: int, lo: tuple, W: GRingElem | None):
        """Image of int_{s >= lo} q(m s) W(s) ds."""
        k = self.k
        base = self.qpow(_smul(m, lo))
        if W is None:
            return base / (1 - self.r ** m)
        total = self.one * 0
        for (e, args), c in W.terms.items():
            slopes = [a[k] for a in args] + ([row[k] for row in e] if e is not None else [])
            P = 1
            for sl in slopes:
                P = P * sl.denominator // math.gcd(P, sl.denominator)
            w = self.r ** (m * P)
            ew = {}
            for rho in range(P):
                if e is not None and any((row[k] * rho).denominator != 1 for row in e):
                    continue
                # polynomial in l (j = rho + P l) as a coefficient list
                poly = [self.one * sympy.Rational(c.numerator, c.denominator)]
                for a in args:
                    const = tuple(a[i] + a[k] * lo[i] for i in range(k))
                    off = Fraction(math.ceil(a[k] * rho))
                    c0 = self.lin(const) + sympy.Rational(off.numerator, off.denominator)
                    c1 = a[k] * P
                    c1 = sympy.Rational(c1.numerator, c1.denominator)
                    nxt = [self.one * 0] * (len(poly) + 1)
                    for h, p in enumerate(poly):
                        nxt[h] = nxt[h] + p * c0
                        if c1:
                            nxt[h + 1] = nxt[h + 1] + p * c1
                    poly = nxt
                part = self.one * 0
                for h, p in enumerate(poly):
                    if p == 0:
                        continue
                    if h not in ew:
                        ew[h] = _horner(_eulerian_sum(h), w, self.one) / (1 - w) ** (h + 1)
                    part = part + p * ew[h]
                total = total + part * self.r ** (m * rho)
        return base * total

    def tail(self, t: Tail, localized: bool):
        if t.lo is None:
            if not localized:
                raise ValueError("negative tails have an image only in the localized ring")
            return -self.ray(t.m, t.hi, t.weight)
        img = self.ray(t.m, t.lo, t.weight)
        if t.hi is not None:
            img = img - self.ray(t.m, t.hi, t.weight)
        return img


def _exponent_denominator(f: "ConvElem") -> int:
    D = 1
    vals = []
    for (b, tails, den) in f.terms:
        vals += list(b)
        for t in tails:
            for end in (t.lo, t.hi):
                if end is not None:
                    vals += [t.m * x for x in end]
        for M, _ in den:
            vals += [M * x for x in f.ring.a0]
    for v in vals:
        D = D * v.denominator // math.gcd(D, v.denominator)
    return D


def psi_star(f: ConvElem) -> ThetaPoly:
    """Image in the rational functions of theta, q1.. and x1.. ."""
    ring = f.ring
    ctx = _PsiContext(ring.rank, _exponent_denominator(f))
    total = ctx.one * 0
    cache: dict = {}
    for (b, tails, den), c in f.terms.items():
        term = ctx.psi(c) * ctx.qpow(b)
        for t in tails:
            if t not in cache:
                cache[t] = ctx.tail(t, ring.localized)
            term = term * cache[t]
        for M, e in den:
            term = term / (1 - ctx.qpow(_smul(M, ring.a0))) ** e
        total = total + term
    return ThetaPoly.make(ring.rank, ctx.D, total)


def theta_equal(a, b, k: int = 1) -> bool:
    if not isinstance(a, ThetaPoly):
        a = ThetaPoly.from_expr(a, k=k)
    return a == b


def theta_reduce(n: int):
    """theta_n as a rational function of theta, by the recursion
    theta_{n+1} (theta + theta_n - 1) = theta_n theta."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    tn = THETA
    for _ in range(n - 1):
        tn = sympy.cancel(tn * THETA / (THETA + tn - 1))
    return sympy.factor(tn)


def theta_closed_form(n: int):
    """From 1 - theta_n^-1 = (1 - theta^-1)^n."""
    return sympy.factor(THETA ** n / (THETA ** n - (THETA - 1) ** n))


def psi_map(poly, ring: ConvRing) -> ConvElem:
    """The map T_A[q^A][theta] -> ring: x_i -> i(gamma_i), q^a -> q(a),
    theta -> theta_1.  poly is a sympy polynomial in x1.., q1.., theta."""
    k = ring.rank
    xs, qs = x_symbols(k), q_symbols(k)
    poly = sympy.expand(sympy.sympify(poly))
    out = ring.zero()
    for mon in sympy.Add.make_args(poly):
        coef, rest = mon.as_coeff_Mul()
        elem = ring.const(Fraction(int(sympy.Rational(coef).p), int(sympy.Rational(coef).q)))
        shift = [ZERO] * k
        for fac in sympy.Mul.make_args(rest):
            base, ex = fac.as_base_exp()
            if base == 1:
                continue
            if base in qs:
                i = qs.index(base)
                ex = sympy.Rational(ex)
                shift[i] += Fraction(int(ex.p), int(ex.q))
                continue
            ex = int(ex)
            if base in xs:
                i = xs.index(base)
                unit = tuple(ONE if j == i else ZERO for j in range(k))
                elem = elem * ring.const(GRingElem.iota(unit) ** ex)
            elif base == THETA:
                elem = elem * ring.theta(1) ** ex
            else:
                raise ValueError(f"unexpected factor {fac}")
        if any(shift):
            elem = elem * ring.q(tuple(shift))
        out = out + elem
    return out


# -- equality ----------------------------------------------------------------

def equal(f: ConvElem, g: ConvElem, samples: Sequence | None = None, m_max: int = 4) -> Comparison:
    """Equality in the ring.  Divisible mode decides through psi_star; else a
    pointwise count difference proves inequality, a psi_star difference
    proves it too, and otherwise the answer is unknown."""
    ring = f.ring
    pf, pg = psi_star(f), psi_star(g)
    same_psi = pf == pg
    if ring.divisible:
        return Comparison("equal" if same_psi else "not_equal", None if same_psi else (pf, pg))
    if not same_psi:
        return Comparison("not_equal", (pf, pg))
    if ring.rank == 1:
        for gam in samples if samples is not None else [Fraction(j, 2) for j in range(-4, 25)]:
            a, b = pointwise_eval(f, gam), pointwise_eval(g, gam)
            for m in range(1, m_max + 1):
                if count_hom(a, m) != count_hom(b, m):
                    return Comparison("not_equal", (gam, m))
    return Comparison("unknown")


# -- filtration ----------------------------------------------------------------

def filtration_degree(f: ConvElem) -> int:
    """Largest i-degree of the values: coefficient degree plus the fibre
    dimension of the tail product plus the tail weights' degrees."""
    best = -1
    for (b, tails, den), c in f.terms.items():
        d = max(c.degree(), 0) + sum(t.degree() for t in tails) + max(len(tails) - 1, 0)
        best = max(best, d)
    return best


def is_generator_form(f: ConvElem) -> bool:
    """Only shifts, constant coefficients and weightless tails."""
    return all(t.weight is None for (_, tails, _) in f.terms for t in tails)


def theta_product_degree(f: ConvElem) -> int:
    """Coefficient degree plus number of tails: the index n of the
    products q(b) a_1 ... a_n spanning the element."""
    return max((max(c.degree(), 0) + len(tails) for (_, tails, _), c in f.terms.items()), default=-1)


# -- truncation of an unbounded tail ------------------------------------------

def _single_ray(f: ConvElem):
    if len(f.terms) != 1:
        raise ValueError("expected a single term with one theta tail")
    (b, tails, den), c = next(iter(f.terms.items()))
    if len(tails) != 1 or tails[0].lo is None or tails[0].hi is not None:
        raise ValueError("expected a single term with one theta tail")
    return b, tails[0], den, c


def _check_period(t: Tail, delta, k: int):
    if t.weight is None:
        return
    for (e, args), _ in t.weight.terms.items():
        rows = list(args) + (list(e) if e is not None else [])
        for a in rows:
            if any((a[k] * d).denominator != 1 for d in delta):
                raise ValueError("shift is not in m*A for the slopes of the tail weight")


def truncate_step(f: ConvElem, a) -> ConvElem:
    """One step: theta-tail f = int_{s>=lo} q(ms) W(s) ds becomes
    (1-q(a))^-1 [int_{lo}^{lo+a/m} q(ms) W ds + int_{s>=lo+a/m} q(ms) W1 ds]
    with W1(s) = W(s) - W(s - a/m) of lower degree."""
    ring = f.ring
    k = ring.rank
    a = _scalar(a, k)
    if not any(a):
        raise ValueError("a must be nonzero")
    M = _multiple_of(a, ring.a0)
    b, t, den, c = _single_ray(f)
    delta = _smul(Fraction(1, t.m), a)
    if any(x.denominator != 1 for x in delta):
        raise ValueError("a is not in m*A")
    _check_period(t, delta, k)
    W = t.weight if t.weight is not None else GRingElem.const(k + 1)
    W1 = W - _shift_arg(W, k, delta)
    new_lo = _add(t.lo, delta)
    inv = ring.inverse_factor(M)
    lead = ConvElem(ring, {(b, (), den): c})
    bounded = ring.tail(t.m, t.lo, new_lo, t.weight)
    rest = ring.zero() if W1.is_zero() else ring.tail(t.m, new_lo, None, W1)
    return lead * inv * (bounded + rest)


def _multiple_of(a, a0) -> int:
    ratios = {x / y for x, y in zip(a, a0) if y}
    if any(x for x, y in zip(a, a0) if not y) or len(ratios) != 1:
        raise ValueError("a must be a positive integer multiple of a0")
    M = ratios.pop()
    if M.denominator != 1 or M <= 0:
        raise ValueError("a must be a positive integer multiple of a0")
    return int(M)


def truncate_to_bounded(f: ConvElem, a) -> ConvElem:
    """Iterate truncate_step until no unbounded tail is left."""
    out = f.ring.zero()
    todo = [f]
    while todo:
        g = todo.pop()
        step = truncate_step(g, a)
        for key, c in step.terms.items():
            piece = ConvElem(g.ring, {key: c})
            if any(t.hi is None for t in key[1]):
                # peel off the shift/denominator so the ray can be truncated again
                todo.append(piece)
            else:
                out = out + piece
    return out


# -- integrals of Q_m against i-polynomials -----------------------------------

def _factor_fn(factors, k: int, r: int, pos: int) -> GRingElem:
    h = GRingElem.const(r)
    for alpha_j, c_j in factors:
        v = list(_scalar(c_j, k)) + [ZERO] * (r - k)
        v[pos] = Fraction(alpha_j)
        h = h * GRingElem.iota(tuple(v))
    return h


def integrate_Qm_product(ring: ConvRing, m: int, alpha, c, factors, b, route: str = "fubini") -> ConvElem:
    """int_0^b Q_m(alpha t + c) prod_j i(alpha_j t + c_j) dt.

    route="fubini" swaps the order of integration and returns weighted
    tails; route="translation" (alpha = 1 only) splits Q_m(t + c) at t.
    """
    k = ring.rank
    alpha = Fraction(alpha)
    c, b = _scalar(c, k), _scalar(b, k)
    if alpha <= 0 or any(Fraction(aj) <= 0 for aj, _ in factors):
        raise ValueError("slopes must be positive")
    if not any(b):
        return ring.zero()
    if route == "translation":
        if alpha != 1:
            raise ValueError("the translation route needs alpha = 1")
        h = _factor_fn(factors, k, k + 1, k)
        inner = integrate(h, k, (ZERO,) * (k + 1), tuple(b) + (ZERO,)).drop_coords(k)
        wt = None if not factors else h
        qb = ring.tail(m, 0, b, wt)
        return ring.theta(m) * (ring.const(inner) - qb) + ring.Q(m, c) * qb
    if route != "fubini":
        raise ValueError(f"unknown route {route!r}")
    sign = 1
    tlo, thi = (ZERO,) * k, b
    if b < (ZERO,) * k:
        sign, tlo, thi = -1, b, (ZERO,) * k
    r = k + 2
    s_pos, t_pos = k, k + 1
    h = _factor_fn(factors, k, r, t_pos)

    def vec(const, s=0, t=0):
        return tuple(list(const) + [Fraction(s), Fraction(t)])

    base = [(vec([-x for x in tlo], t=1), GE), (vec(thi, t=-1), GT)]
    # s in [0, alpha t + c) counts +1, s in [alpha t + c, 0) counts -1
    pos_region = base + [(vec((ZERO,) * k, s=1), GE), (vec(c, s=-1, t=alpha), GT)]
    neg_region = base + [(vec((ZERO,) * k, s=-1), GT), (vec([-x for x in c], s=1, t=-alpha), GE)]
    out = ring.zero()
    for region_sign, cons in ((1, pos_region), (-1, neg_region)):
        for region, val in class_pieces(cons, r - 1, h, s_pos, k):
            W = val.drop_coords(k + 1)
            for sh, coef, tail in _interval_terms(region, W, k, s_pos, m):
                key = (sh, () if tail is None else (tail,), ())
                out = out + ConvElem(ring, {key: coef}) * (sign * region_sign)
    return out


# -- negative tails -----------------------------------------------------------

def negative_support_extend(f: ConvElem) -> ConvElem:
    """Replace theta^- tails using theta^-_{m,b} + theta_{m,b} = 0, which
    holds once (1 - q(m a0)) is inverted."""
    ring = f.ring
    if not ring.localized:
        raise ValueError("negative_support_extend needs the localized ring")
    out = ring.zero()
    for (b, tails, den), c in f.terms.items():
        term = ConvElem(ring, {(b, (), den): c})
        for t in tails:
            if t.lo is None:
                term = term * -ring.tail(t.m, t.hi, None, t.weight)
            else:
                term = term * ConvElem(ring, {(ring.zero_shift, (t,), ()): GRingElem.const(ring.rank)})
        out = out + term
    return out


# -- theta is not algebraic over bounded elements -----------------------------

def nonvanishing_witness(coeffs: Sequence[ConvElem], search: int = 60):
    """For P(theta) = sum c_i theta^i with bounded c_i, a point gamma where
    count_1 of P(theta) is nonzero (rank 1), or None."""
    if not coeffs:
        return None
    ring = coeffs[0].ring
    P = ring.zero()
    th = ring.theta(1)
    for i, c in enumerate(coeffs):
        if not c.is_bounded():
            raise ValueError("coefficients must have bounded support")
        P = P + c * th ** i
    for g in range(search + 1):
        if count_at(P, g) != 0:
            return g
    return None


# -- text syntax ---------------------------------------------------------------

class ConvParser(ExprParser):
    """Adds q(b), theta(m), theta(m,b) and Q(m,b) to the gring grammar."""

    def __init__(self, text: str, ring: ConvRing):
        super().__init__(text, ring.rank)
        self.ring = ring

    def constant(self, c):
        return self.ring.const(c)

    def lift(self, u):
        return self.ring.const(u)

    def _int_then_scalar(self):
        self.take("op", "(")
        m = self.take("num")[1]
        if m.denominator != 1:
            raise ValueError("multiplier must be an integer")
        b = (ZERO,) * self.rank
        if self.peek() == ("op", ","):
            self.take()
            neg = False
            if self.peek() == ("op", "-"):
                self.take()
                neg = True
            t = self.take()
            b = parse_scalar(str(t[1]), self.rank)
            if neg:
                b = -b
        self.take("op", ")")
        return int(m), tuple(b)

    def atom(self):
        kind, val = self.peek()
        if kind == "name" and val == "q":
            self.take()
            return self.ring.q(tuple(self.scalar_arg()))
        if kind == "name" and val == "theta":
            self.take()
            m, b = self._int_then_scalar()
            return self.ring.theta(m, b)
        if kind == "name" and val == "Q":
            self.take()
            m, b = self._int_then_scalar()
            return self.ring.Q(m, b)
        return super().atom()


def parse_conv(text: str, ring: ConvRing) -> ConvElem:
    return ConvParser(text, ring).parse()
