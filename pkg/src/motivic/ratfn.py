"""Exact rational functions in a few named symbols, x_1..x_k and q_1..q_k.

q-exponents may be fractional.  With D a common denominator, q_i is stored
as u_i^D inside a sympy sparse rational-function field, so arithmetic and
equality reduce to polynomial gcds.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import sympy

from .gring import x_symbols


def q_symbols(k: int) -> list:
    return list(sympy.symbols(f"q1:{k + 1}", positive=True))


@lru_cache(maxsize=None)
def field_for(head: tuple, k: int, D: int):
    us = sympy.symbols(f"_u1:{k + 1}")
    K = sympy.polys.fields.field(list(head) + x_symbols(k) + list(us), sympy.QQ)[0]
    return K, us


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class RatFn:
    __slots__ = ("head", "k", "D", "frac")

    def __init__(self, head: tuple, k: int, D: int, frac):
        self.head, self.k, self.D, self.frac = head, k, D, frac

    def _new(self, D, frac):
        return type(self)(self.head, self.k, D, frac)

    @classmethod
    def gens(cls, head: tuple, k: int, D: int):
        """(field, head generators, x generators, u generators)."""
        K, _ = field_for(head, k, D)
        g = K.gens
        h = len(head)
        return K, g[:h], g[h:h + k], g[h + k:]

    @classmethod
    def from_expr(cls, expr, head: tuple, k: int):
        expr = sympy.sympify(expr)
        qs = q_symbols(k)
        names = {s.name: s for s in list(head) + qs}
        expr = expr.subs({s: names[s.name] for s in expr.free_symbols if s.name in names})
        D = 1
        for p in expr.atoms(sympy.Pow):
            if p.base in qs and isinstance(p.exp, sympy.Rational):
                D = _lcm(D, int(p.exp.q))
        K, us = field_for(head, k, D)
        umap = dict(zip(qs, us))
        e2 = expr.replace(
            lambda a: isinstance(a, sympy.Pow) and a.base in umap,
            lambda a: umap[a.base] ** (a.exp * D),
        )
        e2 = e2.subs({q: u ** D for q, u in umap.items()}, simultaneous=True)
        return cls(head, k, D, K.from_expr(e2))

    def substitute(self, images: dict, D: int | None = None):
        """Apply a substitution {generator index: expression in the target
        field's generators} to numerator and denominator."""
        D = self.D if D is None else D
        K, _ = field_for(self.head, self.k, D)
        old = [g.as_expr() for g in self.frac.field.gens]
        sub = {old[i]: e for i, e in images.items()}
        num = self.frac.numer.as_expr().subs(sub, simultaneous=True)
        den = self.frac.denom.as_expr().subs(sub, simultaneous=True)
        return self._new(D, K.from_expr(num) / K.from_expr(den))

    def lift(self, D: int):
        if D == self.D:
            return self
        if D % self.D:
            raise ValueError("can only lift to a multiple of the denominator")
        _, us = field_for(self.head, self.k, D)
        s = D // self.D
        base = len(self.head) + self.k
        return self.substitute({base + i: u ** s for i, u in enumerate(us)}, D)

    def _coerce(self, other):
        if isinstance(other, RatFn):
            if other.head != self.head or other.k != self.k:
                raise ValueError("incompatible rational-function rings")
            return other
        if isinstance(other, (int, Fraction)):
            K, _ = field_for(self.head, self.k, self.D)
            return self._new(self.D, K(sympy.QQ.convert(other)))
        return type(self).from_expr(other, self.head, self.k)

    def _common(self, other):
        other = self._coerce(other)
        D = _lcm(self.D, other.D)
        return self.lift(D), other.lift(D)

    def __add__(self, other):
        a, b = self._common(other)
        return a._new(a.D, a.frac + b.frac)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._common(other)
        return a._new(a.D, a.frac - b.frac)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._new(self.D, -self.frac)

    def __mul__(self, other):
        a, b = self._common(other)
        return a._new(a.D, a.frac * b.frac)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._common(other)
        return a._new(a.D, a.frac / b.frac)

    def __pow__(self, n: int):
        return self._new(self.D, self.frac ** n)

    def __eq__(self, other):
        if not isinstance(other, (RatFn, int, Fraction, sympy.Expr)):
            return NotImplemented
        a, b = self._common(other)
        if a.frac.denom == b.frac.denom:
            return a.frac.numer == b.frac.numer
        # field elements compare structurally and the sign split between
        # numerator and denominator is not normalized
        return not (a.frac - b.frac).numer

    def __hash__(self):
        return hash((self.head, self.k, str(sympy.cancel(self.as_expr()))))

    def is_zero(self) -> bool:
        return not self.frac.numer

    def as_expr(self):
        _, us = field_for(self.head, self.k, self.D)
        qs = q_symbols(self.k)
        e = self.frac.as_expr()
        return e.subs({u: q ** sympy.Rational(1, self.D) for u, q in zip(us, qs)}, simultaneous=True)

    def q_order(self) -> tuple | None:
        """Lowest q-exponent (lexicographic) of the Laurent expansion in q,
        None for zero.  Factors without q count as order 0."""
        if self.is_zero():
            return None
        base = len(self.head) + self.k

        def low(poly):
            return min(tuple(Fraction(e, self.D) for e in mon[base:]) for mon in poly.monoms())

        num, den = low(self.frac.numer), low(self.frac.denom)
        return tuple(a - b for a, b in zip(num, den))

    def __repr__(self):
        return f"{type(self).__name__}({self})"

    def __str__(self):
        return str(sympy.factor(self.as_expr()))
