"""Symbolic dimension-free ring on the generators e(a) and i(a).

A term is (e-part, i-arguments) with a rational coefficient.  The e-part is
the HNF basis of the lattice Z^r + span(a_1, ..., a_l) (None when trivial),
so e-monomials generating the same subgroup mod Z^r coincide by
construction.  The i-arguments are kept in a fixed normal form:

* i(a + z) = i(a) + i(z) for integral z, and i is additive on integral
  vectors, so every argument is split into its fractional part plus unit
  vectors;
* a fractional part f with 2f integral is removed with
  i(f) = (i(2f) + 1 - e(f)) / 2.

Signs follow the integral convention i(x) = "signed length of [0, x)", so
count_m(i(a)) = ceil(m * a) for every sign of a.  Only on integral vectors is
i odd.

Coordinates are generic: a vector of length r may mix the k value-group
generators with integration variables; the volume engine relies on this.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import sympy

from .gamma import BaseGroup, format_scalar, frac_int_split, lattice_hnf, parse_scalar

ZERO = Fraction(0)
ONE = Fraction(1)


def _vec(a) -> tuple:
    return tuple(x if isinstance(x, Fraction) else Fraction(x) for x in a)


def unit(r: int, i: int) -> tuple:
    return tuple(ONE if j == i else ZERO for j in range(r))


def _epart(gens: tuple, r: int):
    if not gens:
        return None
    basis = lattice_hnf(gens, r)
    if all(all(a.denominator == 1 for a in row) for row in basis):
        return None
    return basis


def _epart_depends(e, i: int) -> bool:
    # In reduced HNF, coordinate i is free iff its column is a lone pivot 1.
    col = [row[i] for row in e]
    nz = [x for x in col if x]
    return not (len(nz) == 1 and nz[0] == 1)


def join_epart(e1, e2, r: int):
    if e1 is None:
        return e2
    if e2 is None or e1 == e2:
        return e1
    return _epart(e1 + e2, r)


@lru_cache(maxsize=500_000)
def iota_expansion(a: tuple) -> tuple:
    """i(a) as a tuple of (coef, epart, args) with normalized args."""
    r = len(a)
    f, z = frac_int_split(a)
    out = []
    for i, zi in enumerate(z):
        if zi:
            out.append((Fraction(zi), None, (unit(r, i),)))
    if any(f):
        f = tuple(f)
        if all((2 * x).denominator == 1 for x in f):
            for i, x in enumerate(f):
                if x:
                    out.append((x, None, (unit(r, i),)))
            out.append((Fraction(1, 2), None, ()))
            out.append((Fraction(-1, 2), _epart((f,), r), ()))
        else:
            out.append((ONE, None, (f,)))
    return tuple(out)


class GRingElem:
    __slots__ = ("dim", "terms", "_hash")

    def __init__(self, dim: int, terms: dict | None = None):
        self.dim = dim
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, dim: int, c=1) -> "GRingElem":
        return cls(dim, {(None, ()): Fraction(c)})

    @classmethod
    def zero(cls, dim: int) -> "GRingElem":
        return cls(dim)

    @classmethod
    def iota(cls, a: Sequence) -> "GRingElem":
        a = _vec(a)
        terms: dict = {}
        for c, e, args in iota_expansion(a):
            key = (e, args)
            terms[key] = terms.get(key, ZERO) + c
        return cls(len(a), terms)

    @classmethod
    def e(cls, *gens: Sequence) -> "GRingElem":
        gens = tuple(_vec(g) for g in gens)
        r = len(gens[0])
        return cls(r, {(_epart(gens, r), ()): ONE})

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "GRingElem":
        if isinstance(other, GRingElem):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
            return other
        if isinstance(other, (int, Fraction)):
            return GRingElem.const(self.dim, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, ZERO) + v
        return GRingElem(self.dim, t)

    __radd__ = __add__

    def __neg__(self):
        return GRingElem(self.dim, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GRingElem(self.dim, {k: v * other for k, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        r = self.dim
        t: dict = {}
        for (e1, a1), c1 in self.terms.items():
            for (e2, a2), c2 in other.terms.items():
                key = (join_epart(e1, e2, r), tuple(sorted(a1 + a2)) if a2 else a1)
                t[key] = t.get(key, ZERO) + c1 * c2
        return GRingElem(r, t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = GRingElem.const(self.dim)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GRingElem.const(self.dim, other)
        if not isinstance(other, GRingElem):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Filtration degree: the largest number of i-factors in a term."""
        return max((len(a) for (_, a) in self.terms), default=-1)

    def top_part(self, d: int | None = None) -> "GRingElem":
        if d is None:
            d = self.degree()
        return GRingElem(self.dim, {k: v for k, v in self.terms.items() if len(k[1]) == d})

    def depends_on(self, i: int) -> bool:
        for (e, args) in self.terms:
            if any(a[i] for a in args):
                return True
            if e is not None and _epart_depends(e, i):
                return True
        return False

    def __repr__(self):
        return f"GRingElem({format_elem(self)})"

    def __str__(self):
        return format_elem(self)

    # -- coordinate changes ----------------------------------------------
    def restrict(self, v: int, phi: Sequence) -> "GRingElem":
        """e(phi) * self with coordinate v replaced by the form phi.

        This is the value of the class-valued function on the graph
        x_v = phi, seen over the smaller parameter set.
        """
        phi = _vec(phi)
        r = self.dim
        if phi[v]:
            raise ValueError("phi may not involve the substituted coordinate")

        def sub(a):
            c = a[v]
            if not c:
                return a
            return tuple((ZERO if j == v else x + c * phi[j]) for j, x in enumerate(a))

        out = GRingElem(r)
        cache: dict = {}
        for (e, args), c in self.terms.items():
            rows = (phi,) if e is None else tuple(sub(row) for row in e) + (phi,)
            ee = _epart(tuple(rw for rw in rows if any(rw)), r)
            term = GRingElem(r, {(ee, ()): c})
            for a in args:
                sa = sub(a)
                if sa not in cache:
                    cache[sa] = GRingElem.iota(sa)
                term = term * cache[sa]
            out = out + term
        return out

    def drop_coords(self, keep: int) -> "GRingElem":
        """Project to the first `keep` coordinates; later ones must be unused."""
        t: dict = {}
        for (e, args), c in self.terms.items():
            for a in args:
                if any(a[keep:]):
                    raise ValueError("element still depends on dropped coordinates")
            nargs = tuple(a[:keep] for a in args)
            ne = None
            if e is not None:
                ne = _epart(tuple(row[:keep] for row in e if any(row[:keep])), keep)
            key = (ne, nargs)
            t[key] = t.get(key, ZERO) + c
        return GRingElem(keep, t)

    def embed(self, r: int) -> "GRingElem":
        """View in r >= dim coordinates (new coordinates unused)."""
        pad = (ZERO,) * (r - self.dim)
        t: dict = {}
        for (e, args), c in self.terms.items():
            ne = None if e is None else _epart(tuple(row + pad for row in e), r)
            t[(ne, tuple(a + pad for a in args))] = c
        return GRingElem(r, t)


def rewrite(u: GRingElem) -> GRingElem:
    """Re-derive the normal form from scratch.  Elements are kept normalized
    on construction, so this is idempotent and returns an equal element."""
    r = u.dim
    out = GRingElem(r)
    for (e, args), c in u.terms.items():
        term = GRingElem(r, {(e, ()): c}) if e is None else GRingElem(r, {(_epart(e, r), ()): c})
        for a in args:
            term = term * GRingElem.iota(a)
        out = out + term
    return out


# -- homomorphisms ----------------------------------------------------------

def x_symbols(r: int) -> list:
    return list(sympy.symbols(f"x1:{r + 1}"))


def psi_hom(u: GRingElem, symbols: Sequence | None = None):
    """e(a) -> 1, i(a) -> sum a_i x_i, into the rational function field."""
    xs = list(symbols) if symbols is not None else x_symbols(u.dim)
    out = sympy.Integer(0)
    for (e, args), c in u.terms.items():
        t = sympy.Rational(c.numerator, c.denominator)
        for a in args:
            t *= sum(sympy.Rational(x.numerator, x.denominator) * s for x, s in zip(a, xs) if x)
        out += t
    return sympy.expand(out)


def _dot(a, spec) -> Fraction:
    return sum((x * s for x, s in zip(a, spec) if x), ZERO)


def count_hom(u: GRingElem, m: int, spec: Sequence | None = None) -> Fraction:
    """Lattice-point count at mesh 1/m after specializing generators."""
    if spec is None:
        if u.dim != 1:
            raise ValueError("a specialization is required for rank > 1")
        spec = (ONE,)
    spec = _vec(spec)
    if len(spec) != u.dim:
        raise ValueError("specialization length mismatch")
    total = ZERO
    for (e, args), c in u.terms.items():
        if e is not None and any((m * _dot(row, spec)).denominator != 1 for row in e):
            continue
        v = c
        for a in args:
            v *= math.ceil(m * _dot(a, spec))
            if not v:
                break
        total += v
    return total


@dataclass(frozen=True)
class Comparison:
    verdict: str  # "equal", "not_equal" or "unknown"
    witness: object = None

    def __bool__(self):
        return self.verdict == "equal"


def compare(u: GRingElem, v: GRingElem, m_max: int = 12) -> Comparison:
    """Three-valued equality.  Equal only when normal forms agree; NotEqual
    only with a ring homomorphism that separates the inputs."""
    d = u - v
    if d.is_zero():
        return Comparison("equal")
    # Specializing the single generator to 1 is an isomorphism A -> Z, so
    # every count_m is a ring homomorphism; for higher rank only psi is used.
    if u.dim == 1:
        for m in range(1, m_max + 1):
            cu, cv = count_hom(u, m), count_hom(v, m)
            if cu != cv:
                return Comparison("not_equal", ("count", m, cu, cv))
    pu, pv = psi_hom(u), psi_hom(v)
    if sympy.expand(pu - pv) != 0:
        return Comparison("not_equal", ("psi", pu, pv))
    return Comparison("unknown")


# -- unbounded sets ---------------------------------------------------------

class UnboundedElem:
    """a + b * r where r is the class of the closed-open ray [0, oo).

    Splitting [0,oo)^2 along the diagonal gives r^2 = r.  The open ray
    (0, oo) is r - 1 and satisfies s^2 = -s.
    """

    __slots__ = ("a", "b")

    def __init__(self, a: GRingElem, b: GRingElem | None = None):
        self.a = a
        self.b = b if b is not None else GRingElem.zero(a.dim)

    @classmethod
    def ray(cls, dim: int, open_ray: bool = False) -> "UnboundedElem":
        a = GRingElem.const(dim, -1 if open_ray else 0)
        return cls(a, GRingElem.const(dim, 1))

    def __add__(self, o):
        o = _as_unbounded(o, self.a.dim)
        return UnboundedElem(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return UnboundedElem(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-_as_unbounded(o, self.a.dim))

    def __mul__(self, o):
        o = _as_unbounded(o, self.a.dim)
        return UnboundedElem(self.a * o.a, self.a * o.b + self.b * o.a + self.b * o.b)

    __rmul__ = __mul__

    def __eq__(self, o):
        o = _as_unbounded(o, self.a.dim)
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"({self.a}) + ({self.b})*ray"


def _as_unbounded(o, dim) -> UnboundedElem:
    if isinstance(o, UnboundedElem):
        return o
    if isinstance(o, GRingElem):
        return UnboundedElem(o)
    return UnboundedElem(GRingElem.const(dim, o))


def euler_unbounded(expr, sign_variant: str, group: BaseGroup) -> Fraction:
    """The two Euler characteristics of unbounded classes.

    sign_variant "-" is the compactly supported characteristic (closed-open
    ray -> 0, open ray -> -1); "+" is the bounded one (closed-open ray -> 1,
    open ray -> 0).
    """
    if not group.divisible:
        raise ValueError("Euler characteristics require divisible mode")
    if sign_variant not in ("+", "-"):
        raise ValueError("sign_variant must be '+' or '-'")
    expr = _as_unbounded(expr, group.rank)
    root = ONE if sign_variant == "+" else ZERO

    def chi(u: GRingElem) -> Fraction:
        return sum((c for (_, args), c in u.terms.items() if not args), ZERO)

    return chi(expr.a) + chi(expr.b) * root


# -- text form --------------------------------------------------------------

def _format_coef(c: Fraction) -> str:
    return str(c)


def format_elem(u: GRingElem) -> str:
    if u.is_zero():
        return "0"
    parts = []
    for (e, args), c in sorted(u.terms.items(), key=lambda kv: _term_sort_key(kv[0])):
        factors = []
        if e is not None:
            for row in e:
                if any(x.denominator != 1 for x in row):
                    factors.append(f"e({format_scalar(row)})")
        factors += [f"i({format_scalar(a)})" for a in args]
        body = "*".join(factors)
        if not body:
            parts.append(_format_coef(c))
        elif c == 1:
            parts.append(body)
        elif c == -1:
            parts.append("-" + body)
        else:
            parts.append(f"{_format_coef(c)}*{body}")
    s = " + ".join(parts)
    return s.replace("+ -", "- ")


def _term_sort_key(key):
    e, args = key
    return (-len(args), args, () if e is None else e)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|(\[[^\]]*\])|([A-Za-z_]\w*)|(\S))")


def tokenize(text: str) -> list:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse near {text[pos:]!r}")
        num, sc, name, op = m.groups()
        if num is not None:
            out.append(("num", Fraction(num)))
        elif sc is not None:
            out.append(("scalar", sc))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class ExprParser:
    """Recursive-descent parser for sums of products.  Subclasses extend
    `atom` with more function symbols."""

    def __init__(self, text: str, rank: int):
        self.toks = tokenize(text)
        self.i = 0
        self.rank = rank

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        t = self.peek()
        if t[0] is None or (kind and t[0] != kind) or (value is not None and t[1] != value):
            raise ValueError(f"unexpected token {t[1]!r}")
        self.i += 1
        return t

    def parse(self):
        v = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"trailing input at token {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.power()
        while self.peek() == ("op", "*"):
            self.take()
            v = v * self.power()
        return v

    def power(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.power()
        v = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            n = self.take("num")[1]
            if n.denominator != 1 or n < 0:
                raise ValueError("exponents must be nonnegative integers")
            v = v ** int(n)
        return v

    def scalar_arg(self):
        self.take("op", "(")
        t = self.peek()
        neg = False
        if t == ("op", "-"):
            self.take()
            neg = True
            t = self.peek()
        if t[0] == "scalar":
            self.take()
            s = parse_scalar(t[1], self.rank)
        else:
            s = parse_scalar(str(self.take("num")[1]), self.rank)
        self.take("op", ")")
        return -s if neg else s

    def constant(self, c: Fraction):
        return GRingElem.const(self.rank, c)

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return self.constant(val)
        if kind == "op" and val == "(":
            self.take()
            v = self.expr()
            self.take("op", ")")
            return v
        if kind == "name" and val == "e":
            self.take()
            return self.lift(GRingElem.e(self.scalar_arg()))
        if kind == "name" and val == "i":
            self.take()
            return self.lift(GRingElem.iota(self.scalar_arg()))
        raise ValueError(f"unexpected token {val!r}")

    def lift(self, u: GRingElem):
        return u


def parse_elem(text: str, rank: int = 1) -> GRingElem:
    return ExprParser(text, rank).parse()


def c_binomial(x: GRingElem, n: int) -> GRingElem:
    """binomial(x, n) as a polynomial in the ring element x."""
    out = GRingElem.const(x.dim)
    for j in range(n):
        out = out * (x - j)
    return out * Fraction(1, math.factorial(n))
