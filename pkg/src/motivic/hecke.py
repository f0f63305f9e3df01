"""Iwahori-Hecke algebra of SL2 over a valued field with value group Q.

Elements are written in the Bernstein form

    int p(g) T_g dg + int w(g) T_g R dg

with p, w bounded functions Q -> E (`DensityFn`).  E is the fraction field
of Q[q^Q][x], where x is the image of i(1); so an interval [0, b) has
measure b*x and a single point has measure 1.  Integration over Q is the
discrete calculus sum_{A <= n < B} n^k expressed through ceil-free
Faulhaber polynomials, which is what makes int_0^b i(t) dt equal
i(b)(i(b) - 1)/2 rather than (b x)^2/2.

Multiplication uses T_a T_b = T_{a+b}, R^2 = (q-1) R + q and

    R T_a = T_{-a} R + (q - 1) int_{S(-a, a)} T_g,

where S(l, r) is (l, r] when l < r and minus (r, l] otherwise.  Haar
measure is normalised by vol(open unit ball) = 1, so A^0 = q - 1.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import sympy

from . import kernels
from .ratfn import RatFn, field_for
from .volume import faulhaber

Q_SYM = sympy.Symbol("q", positive=True)
X_SYM = sympy.Symbol("x")
G_SYM = sympy.Symbol("g")


class CoeffE(RatFn):
    """Element of E; prints with q and x."""

    def __init__(self, head, k, D, frac):
        super().__init__(head, k, D, frac)

    @classmethod
    def of(cls, expr) -> "CoeffE":
        if isinstance(expr, (int, Fraction)):
            K, _ = field_for((), 1, 1)
            return cls((), 1, 1, K(sympy.QQ.convert(expr)))
        expr = sympy.sympify(expr)
        names = {s.name: s for s in expr.free_symbols}
        sub = {}
        if "q" in names:
            sub[names["q"]] = sympy.Symbol("q1", positive=True)
        if "x" in names:
            sub[names["x"]] = sympy.Symbol("x1")
        return cls.from_expr(expr.subs(sub, simultaneous=True), (), 1)

    def to_sympy(self):
        e = self.as_expr()
        return e.subs({sympy.Symbol("q1", positive=True): Q_SYM, sympy.Symbol("x1"): X_SYM},
                      simultaneous=True)

    def at(self, x=None, q=None):
        """Specialise x and/or q to numbers (exact)."""
        e = self.to_sympy()
        sub = {}
        if x is not None:
            sub[X_SYM] = sympy.Rational(Fraction(x).numerator, Fraction(x).denominator)
        if q is not None:
            sub[Q_SYM] = sympy.Rational(Fraction(q).numerator, Fraction(q).denominator)
        return sympy.simplify(e.subs(sub))

    def __str__(self):
        return format_coeff(self.to_sympy())

    # Polynomial operands skip the gcd in the generic field arithmetic.
    def _poly_pair(self, other):
        if (isinstance(other, CoeffE) and other.D == self.D
                and self.frac.denom == 1 and other.frac.denom == 1):
            return self.frac.numer, other.frac.numer
        return None

    def _from_numer(self, numer):
        K = self.frac.field
        return CoeffE(self.head, self.k, self.D, K.raw_new(numer, K.ring.one))

    def __add__(self, other):
        pair = self._poly_pair(other)
        if pair:
            return self._from_numer(pair[0] + pair[1])
        return super().__add__(other)

    __radd__ = __add__

    def __sub__(self, other):
        pair = self._poly_pair(other)
        if pair:
            return self._from_numer(pair[0] - pair[1])
        return super().__sub__(other)

    def __mul__(self, other):
        pair = self._poly_pair(other)
        if pair:
            return self._from_numer(pair[0] * pair[1])
        if isinstance(other, (int, Fraction)) and self.frac.denom == 1:
            return self._from_numer(self.frac.numer * sympy.QQ.convert(other))
        return super().__mul__(other)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.frac.numer


def format_coeff(e) -> str:
    return str(sympy.factor(e)).replace(" ", "").replace("**", "^")


ZERO_E = CoeffE.of(0)
ONE_E = CoeffE.of(1)
Q_E = CoeffE.of(Q_SYM)
X_E = CoeffE.of(X_SYM)
QM1 = Q_E - 1


def q_power(a) -> CoeffE:
    a = Fraction(a)
    return CoeffE.of(Q_SYM ** sympy.Rational(a.numerator, a.denominator))


def _e(c) -> CoeffE:
    if isinstance(c, CoeffE):
        return c
    return CoeffE.of(c)


# -- polynomials in g over E ---------------------------------------------------

class GPoly:
    """Polynomial in g = i(gamma) with coefficients in E."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        self.c = {d: v for d, v in (coeffs or {}).items() if not v.is_zero()}

    @classmethod
    def const(cls, v) -> "GPoly":
        return cls({0: _e(v)})

    @classmethod
    def linear(cls, alpha, beta) -> "GPoly":
        """alpha*g + beta with beta in E."""
        return cls({1: _e(alpha), 0: _e(beta)})

    def degree(self) -> int:
        return max(self.c, default=-1)

    def is_zero(self) -> bool:
        return not self.c

    def __add__(self, other):
        out = dict(self.c)
        for d, v in other.c.items():
            out[d] = out[d] + v if d in out else v
        return GPoly(out)

    def __neg__(self):
        return GPoly({d: -v for d, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "GPoly":
        s = _e(s)
        if s.is_zero():
            return GPoly()
        return GPoly({d: v * s for d, v in self.c.items()})

    def __mul__(self, other):
        if not isinstance(other, GPoly):
            return self.scale(other)
        out: dict = {}
        for d1, v1 in self.c.items():
            for d2, v2 in other.c.items():
                d = d1 + d2
                out[d] = out[d] + v1 * v2 if d in out else v1 * v2
        return GPoly(out)

    def __eq__(self, other):
        if not isinstance(other, GPoly):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sorted(self.c)))

    def compose(self, lin: "GPoly") -> "GPoly":
        """self(lin(g))."""
        out = GPoly()
        p = GPoly.const(1)
        for d in range(self.degree() + 1):
            if d in self.c:
                out = out + p.scale(self.c[d])
            p = p * lin
        return out

    def eval(self, v: CoeffE) -> CoeffE:
        out = ZERO_E
        p = ONE_E
        for d in range(self.degree() + 1):
            if d in self.c:
                out = out + self.c[d] * p
            p = p * v
        return out

    def at_point(self, gamma) -> CoeffE:
        return self.eval(X_E * Fraction(gamma))

    def to_sympy(self):
        return sum((v.to_sympy() * G_SYM ** d for d, v in self.c.items()), sympy.Integer(0))

    def __str__(self):
        return format_coeff(self.to_sympy())


def _lin_power_table(alpha, beta, delta, n):
    """Powers of alpha*g + beta*x + delta as {(deg g, deg x): Fraction}."""
    base = {(1, 0): Fraction(alpha), (0, 1): Fraction(beta), (0, 0): Fraction(delta)}
    base = {k: v for k, v in base.items() if v}
    out = [{(0, 0): Fraction(1)}]
    for _ in range(n):
        nxt: dict = {}
        for (a, b), v in out[-1].items():
            for (c, d), w in base.items():
                nxt[(a + c, b + d)] = nxt.get((a + c, b + d), 0) + v * w
        out.append(nxt)
    return out


@lru_cache(maxsize=None)
def _faulhaber_diff(i: int, A: tuple, B: tuple) -> tuple:
    """Phi_i(B) - Phi_i(A) as ((deg g, coefficient in E), ...) where the
    ends are (alpha, beta, delta) meaning alpha*g + beta*x + delta."""
    coeffs = faulhaber(i)
    acc: dict = {}
    for end, sign in ((B, 1), (A, -1)):
        powers = _lin_power_table(*end, len(coeffs) - 1)
        for k, c in enumerate(coeffs):
            if not c:
                continue
            for key, v in powers[k].items():
                acc[key] = acc.get(key, 0) + sign * c * v
    K, _ = field_for((), 1, 1)
    by_g: dict = {}
    for (dg, dx), v in acc.items():
        if v:
            by_g.setdefault(dg, {})[(dx, 0)] = sympy.QQ.convert(v)
    return tuple((dg, CoeffE((), 1, 1, K.raw_new(K.ring.from_dict(terms), K.ring.one)))
                 for dg, terms in sorted(by_g.items()))


def _sum_between(integrand: dict, lo: tuple, lo_closed: bool, hi: tuple, hi_closed: bool) -> GPoly:
    """sum over n with lo (<|<=) n (<|<=) hi of sum c_ij n^i g^j.

    integrand maps (i, j) -> E; lo and hi are (alpha, beta) meaning the
    i-value alpha*g + beta*x of the end.
    """
    A = (lo[0], lo[1], 0 if lo_closed else 1)
    B = (hi[0], hi[1], 1 if hi_closed else 0)
    out: dict = {}
    for (i, j), c in integrand.items():
        for dg, v in _faulhaber_diff(i, A, B):
            key = j + dg
            out[key] = out[key] + c * v if key in out else c * v
    return GPoly(out)


# -- bounded functions Q -> E ---------------------------------------------------

@dataclass(frozen=True)
class Bound:
    """s (> | >= | < | <=) alpha*gamma + beta."""

    alpha: int
    beta: Fraction
    op: str

    def at(self, gamma) -> Fraction:
        return self.alpha * Fraction(gamma) + self.beta

    @property
    def lower(self) -> bool:
        return self.op in (">", ">=")

    @property
    def closed(self) -> bool:
        return self.op in (">=", "<=")

    def form(self) -> tuple:
        return (self.alpha, self.beta)


def _active(bounds, gamma):
    """(lower bound, upper bound) binding at gamma; open wins ties."""
    lows = [b for b in bounds if b.lower]
    highs = [b for b in bounds if not b.lower]
    if not lows or not highs:
        raise ValueError("integration range is unbounded")
    lo = max(lows, key=lambda b: (b.at(gamma), not b.closed))
    hi = min(highs, key=lambda b: (b.at(gamma), b.closed))
    return lo, hi


def _nonempty(lo: Bound, hi: Bound, gamma) -> bool:
    a, b = lo.at(gamma), hi.at(gamma)
    return a < b or (a == b and lo.closed and hi.closed)


def param_integral(integrand: dict, bounds) -> "DensityFn":
    """gamma -> sum over s satisfying all bounds of integrand(i(s), i(gamma)).

    The result is bounded; an unbounded family raises ValueError.
    """
    bounds = list(bounds)
    breaks = set()
    for b1, b2 in itertools.combinations(bounds, 2):
        if b1.alpha != b2.alpha:
            breaks.add((b2.beta - b1.beta) / (b1.alpha - b2.alpha))
    breaks = sorted(breaks)
    if not breaks:
        lo, hi = _active(bounds, Fraction(0))
        if _nonempty(lo, hi, Fraction(0)):
            raise ValueError("support is unbounded")
        return DensityFn()
    for probe in (breaks[0] - 1, breaks[-1] + 1):
        lo, hi = _active(bounds, probe)
        if _nonempty(lo, hi, probe):
            raise ValueError("support is unbounded")
    pieces, atoms = [], {}
    prev = GPoly()
    for idx, b in enumerate(breaks):
        # value exactly at the breakpoint
        lo, hi = _active(bounds, b)
        if _nonempty(lo, hi, b):
            val = _sum_between(integrand, (0, lo.at(b)), lo.closed, (0, hi.at(b)), hi.closed).at_point(b)
        else:
            val = ZERO_E
        atoms[b] = val - prev.at_point(b)
        if idx + 1 < len(breaks):
            nb = breaks[idx + 1]
            mid = (b + nb) / 2
            lo, hi = _active(bounds, mid)
            if _nonempty(lo, hi, mid):
                poly = _sum_between(integrand, lo.form(), lo.closed, hi.form(), hi.closed)
                pieces.append((b, nb, poly))
                prev = poly
            else:
                prev = GPoly()
    return DensityFn(pieces, atoms)


class DensityFn:
    """Bounded function Q -> E: polynomial pieces on (a, b] plus point values.

    Point values are added on top of the pieces.  The canonical form has
    disjoint pieces, no zero pieces, adjacent pieces with different
    polynomials and no zero atoms, which makes equality structural.
    """

    __slots__ = ("pieces", "atoms")

    def __init__(self, pieces=(), atoms=None):
        self.pieces, self.atoms = _canonical(
            [(Fraction(a), Fraction(b), p) for a, b, p in pieces],
            {Fraction(k): _e(v) for k, v in (atoms or {}).items()},
        )

    # constructors
    @classmethod
    def point(cls, a, c=1) -> "DensityFn":
        return cls((), {a: c})

    @classmethod
    def interval(cls, lo, hi, c=1, lo_closed=False, hi_closed=True) -> "DensityFn":
        """c times the indicator of the interval between lo and hi."""
        lo, hi = Fraction(lo), Fraction(hi)
        c = _e(c)
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return cls()
        if lo == hi:
            return cls.point(lo, c)
        atoms = {}
        if lo_closed:
            atoms[lo] = c
        if not hi_closed:
            atoms[hi] = -c
        return cls([(lo, hi, GPoly.const(c))], atoms)

    @classmethod
    def piece(cls, lo, hi, poly: GPoly) -> "DensityFn":
        return cls([(lo, hi, poly)])

    # queries
    def is_zero(self) -> bool:
        return not self.pieces and not self.atoms

    def value(self, gamma) -> CoeffE:
        gamma = Fraction(gamma)
        out = self.atoms.get(gamma, ZERO_E)
        for a, b, p in self.pieces:
            if a < gamma <= b:
                out = out + p.at_point(gamma)
        return out

    def support(self):
        pts = list(self.atoms) + [x for a, b, _ in self.pieces for x in (a, b)]
        return (min(pts), max(pts)) if pts else None

    def breakpoints(self) -> list:
        return sorted(set(self.atoms) | {x for a, b, _ in self.pieces for x in (a, b)})

    # arithmetic
    def __add__(self, other):
        return DensityFn(self.pieces + other.pieces, _merge_atoms(self.atoms, other.atoms))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DensityFn":
        c = _e(c)
        if c.is_zero():
            return DensityFn()
        return DensityFn([(a, b, p.scale(c)) for a, b, p in self.pieces],
                         {k: v * c for k, v in self.atoms.items()})

    def shift(self, a) -> "DensityFn":
        """gamma -> f(gamma - a)."""
        a = Fraction(a)
        lin = GPoly.linear(1, X_E * (-a))
        return DensityFn([(lo + a, hi + a, p.compose(lin)) for lo, hi, p in self.pieces],
                         {k + a: v for k, v in self.atoms.items()})

    def reflect(self) -> "DensityFn":
        """gamma -> f(-gamma)."""
        pieces, atoms = [], {-k: v for k, v in self.atoms.items()}
        minus_g = GPoly.linear(-1, 0)
        for lo, hi, p in self.pieces:
            pieces.append((-hi, -lo, p.compose(minus_g)))
            atoms = _merge_atoms(atoms, {-hi: p.at_point(hi), -lo: -p.at_point(lo)})
        return DensityFn(pieces, atoms)

    def __eq__(self, other):
        if not isinstance(other, DensityFn):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(self.atoms)) ^ hash(tuple((a, b) for a, b, _ in self.pieces))

    def __repr__(self):
        return f"DensityFn({join_terms(self.terms_text('T'))})"

    def terms_text(self, name: str) -> list:
        """Printable terms; `name` is T or T*R style (atoms) for callers."""
        out = []
        for a in sorted(self.atoms):
            out.append((self.atoms[a].to_sympy(), _atom_text(a, name)))
        for lo, hi, p in self.pieces:
            if p.degree() == 0:
                out.append((p.c[0].to_sympy(), _int_text(lo, hi, None, name)))
            else:
                out.append((sympy.Integer(1), _int_text(lo, hi, p, name)))
        return out


def _merge_atoms(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] + v if k in out else v
    return out


def _canonical(pieces: list, atoms: dict):
    cuts = sorted({x for a, b, _ in pieces for x in (a, b)})
    elem = []
    for lo, hi in zip(cuts, cuts[1:]):
        total = GPoly()
        for a, b, p in pieces:
            if a <= lo and hi <= b:
                total = total + p
        elem.append([lo, hi, total])
    merged = []
    for lo, hi, p in elem:
        if p.is_zero():
            continue
        if merged and merged[-1][1] == lo and merged[-1][2] == p:
            merged[-1][1] = hi
        else:
            merged.append([lo, hi, p])
    atoms = {k: v for k, v in sorted(atoms.items()) if not v.is_zero()}
    return [tuple(m) for m in merged], atoms


def _frac_text(a: Fraction) -> str:
    return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"


def _atom_text(a: Fraction, name: str) -> str:
    if name == "T":
        return "1" if a == 0 else f"T({_frac_text(a)})"
    return "R" if a == 0 else f"T({_frac_text(a)})*R"


def _int_text(lo, hi, poly, name) -> str:
    inner = f"({_frac_text(lo)},{_frac_text(hi)}]"
    body = f"int({inner})" if poly is None else f"int({inner}, {poly})"
    return body if name == "T" else body + "*R"


def convolve(f: DensityFn, h: DensityFn) -> DensityFn:
    """(f * h)(gamma) = sum over s of f(s) h(gamma - s)."""
    out = DensityFn()
    for a, c in f.atoms.items():
        for b, d in h.atoms.items():
            out = out + DensityFn.point(a + b, c * d)
        out = out + DensityFn(h.pieces).shift(a).scale(c)
    for b, d in h.atoms.items():
        out = out + DensityFn(f.pieces).shift(b).scale(d)
    for a1, b1, p in f.pieces:
        for a2, b2, r in h.pieces:
            # p(i(s)) * r(g - i(s)) as a polynomial in (i(s), g)
            integrand: dict = {}
            for i, cp in p.c.items():
                for j, cr in r.c.items():
                    for k in range(j + 1):
                        key = (i + k, j - k)
                        val = cp * cr * (comb(j, k) * (-1) ** k)
                        integrand[key] = integrand[key] + val if key in integrand else val
            bounds = [Bound(0, a1, ">"), Bound(0, b1, "<="), Bound(1, -b2, ">="), Bound(1, -a2, "<")]
            out = out + param_integral(integrand, bounds)
    return out


def bernstein_density(h: DensityFn) -> DensityFn:
    """gamma -> sum_a h(a) * sign, over a with gamma in S(-a, a)."""
    out = DensityFn()
    for a, v in h.atoms.items():
        if a > 0:
            out = out + DensityFn.interval(-a, a, v)
        elif a < 0:
            out = out + DensityFn.interval(a, -a, -v)
    for lo, hi, p in h.pieces:
        integrand = {(i, 0): c for i, c in p.c.items()}
        pos = [Bound(0, lo, ">"), Bound(0, hi, "<="), Bound(0, Fraction(0), ">"),
               Bound(1, Fraction(0), ">="), Bound(-1, Fraction(0), ">")]
        neg = [Bound(0, lo, ">"), Bound(0, hi, "<="), Bound(0, Fraction(0), "<"),
               Bound(1, Fraction(0), "<"), Bound(-1, Fraction(0), "<=")]
        if hi > 0:
            out = out + param_integral(integrand, pos)
        if lo < 0:
            out = out - param_integral(integrand, neg)
    return out


# -- the algebra ---------------------------------------------------------------

class HeckeElem:
    """int plus(g) T_g + int w(g) T_g R."""

    __slots__ = ("plus", "w")

    def __init__(self, plus: DensityFn | None = None, w: DensityFn | None = None):
        self.plus = plus if plus is not None else DensityFn()
        self.w = w if w is not None else DensityFn()

    @classmethod
    def scalar(cls, c) -> "HeckeElem":
        return cls(DensityFn.point(0, c))

    @classmethod
    def T(cls, a, c=1) -> "HeckeElem":
        return cls(DensityFn.point(a, c))

    @classmethod
    def R(cls) -> "HeckeElem":
        return cls(None, DensityFn.point(0, 1))

    @classmethod
    def integral(cls, lo, hi, c=1, lo_closed=False, hi_closed=True) -> "HeckeElem":
        return cls(DensityFn.interval(lo, hi, c, lo_closed, hi_closed))

    def is_zero(self) -> bool:
        return self.plus.is_zero() and self.w.is_zero()

    def is_scalar(self) -> bool:
        return self.w.is_zero() and not self.plus.pieces and set(self.plus.atoms) <= {Fraction(0)}

    def __add__(self, other):
        other = _as_hecke(other)
        return HeckeElem(self.plus + other.plus, self.w + other.w)

    __radd__ = __add__

    def __neg__(self):
        return HeckeElem(-self.plus, -self.w)

    def __sub__(self, other):
        return self + (-_as_hecke(other))

    def __rsub__(self, other):
        return _as_hecke(other) - self

    def scale(self, c) -> "HeckeElem":
        return HeckeElem(self.plus.scale(c), self.w.scale(c))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CoeffE)):
            return self.scale(other)
        return hecke_mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        other = _as_hecke(other)
        if not other.is_scalar() or other.is_zero():
            raise ZeroDivisionError("can only divide by a nonzero scalar")
        return self.scale(ONE_E / other.plus.atoms[Fraction(0)])

    def __pow__(self, n: int):
        out = HeckeElem.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CoeffE)):
            other = HeckeElem.scalar(other)
        if not isinstance(other, HeckeElem):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.plus, self.w))

    def __str__(self):
        terms = self.w.terms_text("R") + self.plus.terms_text("T")
        return join_terms(terms)

    def __repr__(self):
        return f"HeckeElem({self})"


def join_terms(terms) -> str:
    if not terms:
        return "0"
    out = ""
    for coef, name in terms:
        coef = sympy.factor(coef)
        neg = coef.could_extract_minus_sign()
        if neg:
            coef = -coef
        if coef == 1:
            body = name
        else:
            c = format_coeff(coef)
            if coef.is_Add:
                c = f"({c})"
            body = c if name == "1" else f"{c}*{name}"
        if not out:
            out = ("-" if neg else "") + body
        else:
            out += (" - " if neg else " + ") + body
    return out


def _as_hecke(x) -> HeckeElem:
    if isinstance(x, HeckeElem):
        return x
    return HeckeElem.scalar(x)


def hecke_mul(X: HeckeElem, Y: HeckeElem) -> HeckeElem:
    p, w = X.plus, X.w
    p2, w2 = Y.plus, Y.w
    plus = convolve(p, p2)
    wpart = convolve(p, w2)
    if not w.is_zero():
        rw2 = w2.reflect()
        plus = plus + convolve(w, bernstein_density(p2)).scale(QM1) + convolve(w, rw2).scale(Q_E)
        wpart = (wpart + convolve(w, p2.reflect()) + convolve(w, rw2).scale(QM1)
                 + convolve(w, bernstein_density(w2)).scale(QM1))
    return HeckeElem(plus, wpart)


def anti_involution(X: HeckeElem) -> HeckeElem:
    """Reverse the order of products: T_a -> T_a, R -> R."""
    return HeckeElem(X.plus + bernstein_density(X.w).scale(QM1), X.w.reflect())


def commutator(X: HeckeElem, Y: HeckeElem) -> HeckeElem:
    return X * Y - Y * X


# -- the module M ---------------------------------------------------------------

class ModuleElem:
    """int e(d) e_d + int f(d) f_d."""

    __slots__ = ("e", "f")

    def __init__(self, e: DensityFn | None = None, f: DensityFn | None = None):
        self.e = e if e is not None else DensityFn()
        self.f = f if f is not None else DensityFn()

    @classmethod
    def e0(cls) -> "ModuleElem":
        return cls(DensityFn.point(0))

    @classmethod
    def f0(cls) -> "ModuleElem":
        return cls(None, DensityFn.point(0))

    def __add__(self, other):
        return ModuleElem(self.e + other.e, self.f + other.f)

    def __sub__(self, other):
        return ModuleElem(self.e - other.e, self.f - other.f)

    def scale(self, c) -> "ModuleElem":
        return ModuleElem(self.e.scale(c), self.f.scale(c))

    def is_zero(self) -> bool:
        return self.e.is_zero() and self.f.is_zero()

    def __eq__(self, other):
        if not isinstance(other, ModuleElem):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.e, self.f))

    def __str__(self):
        terms = []
        for name, dens in (("e", self.e), ("f", self.f)):
            for coef, t in dens.terms_text("T"):
                t = re.sub(r"^1$", f"{name}_0", t)
                t = re.sub(r"^T\((.*)\)$", lambda m: f"{name}_{m.group(1)}", t)
                t = t.replace("int(", f"int_{name}(")
                terms.append((coef, t))
        return join_terms(terms)


def _act_T(v: ModuleElem, p: DensityFn) -> ModuleElem:
    # e_d T_g = e_{d+g}, f_d T_g = f_{d-g}
    return ModuleElem(convolve(v.e, p), convolve(v.f, p.reflect()))


def _act_R(v: ModuleElem) -> ModuleElem:
    # e_d R = f_d - (q-1) int_{S(d,-d)} e ; f_d R = q e_d + (q-1) f_{-d} - (q-1) int_{S(-d,d)} f_{-g}
    e = bernstein_density(v.e).scale(QM1) + v.f.scale(Q_E)
    f = v.e + v.f.reflect().scale(QM1) - bernstein_density(v.f).reflect().scale(QM1)
    return ModuleElem(e, f)


def act(v: ModuleElem, X: HeckeElem) -> ModuleElem:
    """Right action v . X."""
    out = _act_T(v, X.plus)
    if not X.w.is_zero():
        out = out + _act_R(_act_T(v, X.w))
    return out


def module_to_hecke(v: ModuleElem) -> HeckeElem:
    """Inverse of X -> e_0 . X (M is free of rank one on e_0)."""
    return HeckeElem(v.e - bernstein_density(v.f).scale(QM1), v.f)


def table_element(kind: str, gamma) -> HeckeElem:
    """The normalised coset elements R_g / R^-_g, through their action on e_0.

    kind is "R" or "R-"; gamma may have either sign.
    """
    g = Fraction(gamma)
    if kind == "R":
        if g < 0:
            v = ModuleElem(DensityFn.point(g), DensityFn.interval(g, -g, QM1 / Q_E))
        else:
            v = ModuleElem(DensityFn.point(g))
    elif kind == "R-":
        if g <= 0:
            v = ModuleElem(None, DensityFn.point(g))
        else:
            v = ModuleElem(DensityFn.interval(-g, g, QM1, hi_closed=False), DensityFn.point(g))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return module_to_hecke(v)


def basis_change_and_inverse():
    """Coset basis -> (e, f) images from the table and the inverse kernel G.

    Returns (images, G) where images maps (kind, gamma) to e_0 . element and
    G is the candidate resolvent kernel as an `ExpPoly` in z.
    """

    def images(kind, gamma):
        return act(ModuleElem.e0(), table_element(kind, gamma))

    return images, closed_form_G()


# -- intertwiner and center -------------------------------------------------------

def intertwiner_J(b) -> HeckeElem:
    """J_b = (1 - T_b) R + (q-1) int_{(0,b]} T_g."""
    b = Fraction(b)
    if b <= 0:
        raise ValueError("b must be positive")
    return HeckeElem(DensityFn.interval(0, b, QM1), DensityFn.point(0) - DensityFn.point(b))


def check_J_relations(pairs) -> bool:
    """J_b T_a == T_{-a} J_b for every (a, b)."""
    for a, b in pairs:
        J = intertwiner_J(b)
        if J * HeckeElem.T(a) != HeckeElem.T(-a) * J:
            return False
    return True


def intertwiner_on_e0(b, window) -> tuple:
    """(e_0 . J_b', the truncated expansion (1 - T_b)(f_0 + (q-1) int_{(0,window]} e))
    restricted to support below window); J_b' is J_b with products reversed."""
    b, window = Fraction(b), Fraction(window)
    lhs = act(ModuleElem.e0(), anti_involution(intertwiner_J(b)))
    trunc = ModuleElem(DensityFn.interval(0, window, QM1), DensityFn.point(0))
    # left translation: e_d -> e_{d+b}, f_d -> f_{d-b}
    moved = ModuleElem(trunc.e.shift(b), trunc.f.shift(-b))
    rhs = trunc - moved
    rhs = ModuleElem(_restrict(rhs.e, window), _restrict(rhs.f, window))
    return lhs, rhs


def _restrict(f: DensityFn, below) -> DensityFn:
    """Part of f supported on gamma <= below."""
    pieces = []
    for lo, hi, p in f.pieces:
        if lo < below:
            pieces.append((lo, min(hi, below), p))
    return DensityFn(pieces, {k: v for k, v in f.atoms.items() if k <= below})


def annihilates(b, X: HeckeElem) -> bool:
    return (X - HeckeElem.T(b) * X).is_zero()


def is_symmetric_form(Z: HeckeElem) -> bool:
    return Z.w.is_zero() and Z.plus == Z.plus.reflect()


def center_membership(Z: HeckeElem, samples=(1, Fraction(1, 2), -1, 2)) -> bool:
    """Commutes with R and the sampled T_a, and has the form int f (T_g + T_-g)."""
    if not is_symmetric_form(Z):
        return False
    gens = [HeckeElem.R()] + [HeckeElem.T(a) for a in samples]
    return all(commutator(Z, g).is_zero() for g in gens)


def four_subspace_parts(X: HeckeElem):
    """Split X into the (sym, anti) x (T, TR) parts."""
    half = Fraction(1, 2)
    p, w = X.plus, X.w
    ps, pa = (p + p.reflect()).scale(half), (p - p.reflect()).scale(half)
    ws, wa = (w + w.reflect()).scale(half), (w - w.reflect()).scale(half)
    return [HeckeElem(ps), HeckeElem(pa), HeckeElem(None, ws), HeckeElem(None, wa)]


def four_subspace_check(X: HeckeElem, c) -> bool:
    """The parts sum to X and T_c + T_-c maps each part into its own subspace."""
    parts = four_subspace_parts(X)
    if sum(parts, HeckeElem()) != X:
        return False
    L = HeckeElem.T(c) + HeckeElem.T(-c)
    for kind, part in enumerate(parts):
        img = L * part
        sub = four_subspace_parts(img)
        if any(not s.is_zero() for i, s in enumerate(sub) if i != kind):
            return False
    return True


# -- exponential-polynomial calculus for the inverse kernel -------------------------

class ExpPoly:
    """sum c * q^(lam*z) * i(z)^p in one variable z; keys (lam, p)."""

    __slots__ = ("c",)

    def __init__(self, terms=None):
        self.c = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    def __add__(self, other):
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out[k] + v if k in out else v
        return ExpPoly(out)

    def __neg__(self):
        return ExpPoly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "ExpPoly":
        return ExpPoly({k: v * _e(s) for k, v in self.c.items()})

    def is_zero(self) -> bool:
        return not self.c

    def at(self, z) -> CoeffE:
        z = Fraction(z)
        out = ZERO_E
        for (lam, p), v in self.c.items():
            out = out + v * q_power(lam * z) * (X_E * z) ** p
        return out

    def __str__(self):
        z = sympy.Symbol("z")
        e = sum((v.to_sympy() * Q_SYM ** (sympy.Rational(lam.numerator, lam.denominator) * z)
                 * sympy.Symbol("i(z)") ** p for (lam, p), v in self.c.items()), sympy.Integer(0))
        return str(e)


@lru_cache(maxsize=None)
def _geometric_antidiff(lam: Fraction, p: int):
    """Coefficients d_0..d_p of Q with r Q(n+1) - Q(n) = n^p, r = q^lam != 1."""
    r = q_power(lam)
    d = [ZERO_E] * (p + 1)
    d[p] = ONE_E / (r - 1)
    for j in range(p - 1, -1, -1):
        acc = ZERO_E
        for i in range(j + 1, p + 1):
            acc = acc + d[i] * comb(i, j)
        d[j] = -(r * acc) / (r - 1)
    return d


def _antidiff_at(lam: Fraction, p: int, at_z: bool, shift: int) -> ExpPoly:
    """F(n) at n = i(z) + shift (at_z) or n = shift, where
    F(B) - F(A) = sum_{A <= n < B} q^(lam n) n^p."""
    lam = Fraction(lam)
    if lam == 0:
        coeffs = faulhaber(p)
        poly = {}
        for k, c in enumerate(coeffs):
            if not c:
                continue
            if at_z:
                for j in range(k + 1):
                    poly[(Fraction(0), j)] = poly.get((Fraction(0), j), ZERO_E) + ONE_E * (c * comb(k, j) * shift ** (k - j))
            else:
                poly[(Fraction(0), 0)] = poly.get((Fraction(0), 0), ZERO_E) + ONE_E * (c * shift ** k)
        return ExpPoly(poly)
    d = _geometric_antidiff(lam, p)
    rs = q_power(lam * shift)
    out = {}
    for k, c in enumerate(d):
        if at_z:
            for j in range(k + 1):
                key = (lam, j)
                out[key] = out.get(key, ZERO_E) + c * rs * comb(k, j) * shift ** (k - j)
        else:
            key = (Fraction(0), 0)
            out[key] = out.get(key, ZERO_E) + c * rs * shift ** k
    return ExpPoly(out)


def integrate_w(terms: dict, lo: str, lo_closed: bool, hi: str, hi_closed: bool) -> ExpPoly:
    """Integrate sum c q^(mu z) i(z)^a q^(lam w) i(w)^p over w between the
    ends ("z" or "0"), giving an ExpPoly in z.  Keys (mu, a, lam, p)."""
    out = ExpPoly()
    for (mu, a, lam, p), c in terms.items():
        start = 0 if lo_closed else 1
        stop = 1 if hi_closed else 0
        F_hi = _antidiff_at(lam, p, hi == "z", stop)
        F_lo = _antidiff_at(lam, p, lo == "z", start)
        diff = F_hi - F_lo
        outer = {}
        for (l2, p2), v in diff.c.items():
            key = (Fraction(mu) + l2, a + p2)
            outer[key] = outer.get(key, ZERO_E) + v * c
        out = out + ExpPoly(outer)
    return out


def closed_form_G() -> ExpPoly:
    """(q/(q^2-1)) (q^-1 O_o^z - q O_o^-z) with O_o^z = q^-z."""
    k = Q_E / (Q_E * Q_E - 1)
    return ExpPoly({(Fraction(-1), 0): k / Q_E, (Fraction(1), 0): -(k * Q_E)})


def resolvent_G() -> ExpPoly:
    """Solution of the kernel equation with the ansatz a q^-z + b q^z."""
    # residual is linear in (a, b); read it off at two basis vectors
    r_a = kernel_residual(ExpPoly({(Fraction(-1), 0): ONE_E}))
    r_b = kernel_residual(ExpPoly({(Fraction(1), 0): ONE_E}))
    r_0 = kernel_residual(ExpPoly())
    keys = sorted(set(r_a.c) | set(r_b.c) | set(r_0.c))
    a, b = sympy.symbols("a b")
    eqs = []
    for key in keys:
        ca = (r_a.c.get(key, ZERO_E) - r_0.c.get(key, ZERO_E)).to_sympy()
        cb = (r_b.c.get(key, ZERO_E) - r_0.c.get(key, ZERO_E)).to_sympy()
        eqs.append(sympy.Eq(ca * a + cb * b + r_0.c.get(key, ZERO_E).to_sympy(), 0))
    sol = sympy.solve(eqs, [a, b], dict=True)
    if not sol:
        raise ArithmeticError("no solution of the form a q^-z + b q^z")
    sol = sol[0]
    return ExpPoly({(Fraction(-1), 0): CoeffE.of(sol[a]), (Fraction(1), 0): CoeffE.of(sol[b])})


def kernel_residual(G: ExpPoly) -> ExpPoly:
    """G(z) - c [z,0) - c int_{w in (z,0)} G(z - w) [w,0), c = (q-1)^2/q, for z < 0."""
    c = QM1 * QM1 / Q_E
    # [z, 0) has class -i(z)
    lin = ExpPoly({(Fraction(0), 1): -ONE_E})
    terms = {}
    for (lam, p), v in G.c.items():
        # q^(lam (z - w)) (i(z) - i(w))^p * (-i(w))
        for j in range(p + 1):
            coef = v * (comb(p, j) * (-1) ** (p - j)) * (-1)
            key = (lam, j, -lam, p - j + 1)
            terms[key] = terms.get(key, ZERO_E) + coef
    integral = integrate_w(terms, "z", False, "0", False)
    return G - lin.scale(c) - integral.scale(c)


def verify_G(z, G: ExpPoly | None = None) -> CoeffE:
    """Residual of the kernel equation at z < 0 (zero when G solves it)."""
    z = Fraction(z)
    if z >= 0:
        raise ValueError("z must be negative")
    return kernel_residual(G if G is not None else closed_form_G()).at(z)


def annulus_integral(sign: int, z) -> ExpPoly:
    """int_{x in (z,0)} O_o^{sign (z - x)} [x, 0) as an ExpPoly in z."""
    if sign not in (1, -1):
        raise ValueError("sign must be +-1")
    # O_o^{sign(z-x)} = q^{-sign z} q^{sign x}; [x,0) = -i(x)
    terms = {(Fraction(-sign), 0, Fraction(sign), 1): -ONE_E}
    return integrate_w(terms, "z", False, "0", False)


# -- parsing ----------------------------------------------------------------------

_TOK = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_]\w*)|(\S))")


def _tokens(text: str) -> list:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", Fraction(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", op))
        pos = m.end()
    return out


class HeckeParser:
    """T(a) | R | int((a,b]) with any bracket pair | q, x, rationals | + - * / ^ ( )."""

    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        t = self.peek()
        if t[0] is None or (kind and t[0] != kind) or (value is not None and t[1] != value):
            raise ValueError(f"unexpected token {t[1]!r}")
        self.i += 1
        return t

    def parse(self) -> HeckeElem:
        v = self.expr()
        if self.i != len(self.toks):
            raise ValueError(f"trailing input at {self.peek()[1]!r}")
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
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            w = self.power()
            v = v * w if op == "*" else v / w
        return v

    def power(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.power()
        v = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            n = self.take("num")[1]
            if n.denominator != 1:
                raise ValueError("exponent must be an integer")
            v = v ** int(n)
        return v

    def number(self) -> Fraction:
        neg = False
        if self.peek() == ("op", "-"):
            self.take()
            neg = True
        n = self.take("num")[1]
        return -n if neg else n

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return HeckeElem.scalar(val)
        if kind == "op" and val == "(":
            self.take()
            v = self.expr()
            self.take("op", ")")
            return v
        if kind == "name":
            self.take()
            if val == "q":
                return HeckeElem.scalar(Q_E)
            if val == "x":
                return HeckeElem.scalar(X_E)
            if val == "R":
                return HeckeElem.R()
            if val == "T":
                self.take("op", "(")
                a = self.number()
                self.take("op", ")")
                return HeckeElem.T(a)
            if val == "int":
                self.take("op", "(")
                left = self.take("op")[1]
                lo = self.number()
                self.take("op", ",")
                hi = self.number()
                right = self.take("op")[1]
                if left not in "([" or right not in ")]":
                    raise ValueError("bad interval brackets")
                self.take("op", ")")
                return HeckeElem.integral(lo, hi, 1, left == "[", right == "]")
        raise ValueError(f"unexpected token {val!r}")


def parse_hecke(text: str) -> HeckeElem:
    return HeckeParser(text).parse()


# -- finite truncation oracle -----------------------------------------------------

class TruncationError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def field_tables(q0: int):
    """Addition and multiplication tables of F_q0 for q0 in {2, 3, 4}."""
    if q0 in (2, 3):
        add = tuple(tuple((a + b) % q0 for b in range(q0)) for a in range(q0))
        mul = tuple(tuple((a * b) % q0 for b in range(q0)) for a in range(q0))
        return add, mul
    if q0 == 4:
        # F_2[t]/(t^2 + t + 1); element = bit pattern
        def m(a, b):
            r = 0
            for i in range(2):
                if b >> i & 1:
                    r ^= a << i
            if r & 4:
                r ^= 0b111
            return r
        add = tuple(tuple(a ^ b for b in range(4)) for a in range(4))
        mul = tuple(tuple(m(a, b) for b in range(4)) for a in range(4))
        return add, mul
    raise ValueError("q0 must be 2, 3 or 4")


def _neg_one(q0: int) -> int:
    add, _ = field_tables(q0)
    return next(b for b in range(q0) if add[1][b] == 0)


# Coset of the second factor as valuation conditions on (a, b, c, d), gamma <= 0.
def _in_S(va, vb, vc, vd, gamma) -> bool:
    return va == gamma and vb >= gamma and vc > gamma and vd >= gamma


def _in_Sminus(va, vb, vc, vd, gamma) -> bool:
    return va >= gamma and vb >= gamma and vc == gamma and vd >= gamma


def _first_factor_ok(first: str, vZ, vW) -> bool:
    """Bottom row (Z, W) of g h^-1 lies in v_0 (val Z > val W = 0) or u_0."""
    if first == "v0":
        return vW == 0 and vZ > 0
    return vZ == 0 and vW >= 0


def coset_measure(q0: int, N: int, first: str, second: str, gamma: int, label: str, delta: int) -> Fraction:
    """Value of (first * second) at the representative of label_delta.

    first in {"v0", "u0"}, second in {"S", "S-"} (index gamma <= 0), label in
    {"v", "u"}.  Computed by enumerating the two free entries of h over the
    length-N truncation; the pivot entry contributes its normalised factor
    q0 - 1 and the fourth entry comes from det = 1.
    """
    add, mul = field_tables(q0)
    if second == "S":
        # pivot a (val gamma); free b (val >= gamma), c (val >= gamma + 1); d = (1 + bc)/a
        hist = kernels.valuation_histogram(add, mul, gamma, gamma + 1, N, 1, 2 * gamma + 1 + N)
        pivot = gamma

        def entries(vx, vy, vs):
            return pivot, vx, vy, vs - pivot

        member = _in_S
        vx0, vy0 = gamma, gamma + 1
    elif second == "S-":
        # pivot c (val gamma); free a, d (val >= gamma); b = (ad - 1)/c
        hist = kernels.valuation_histogram(add, mul, gamma, gamma, N, _neg_one(q0), 2 * gamma + N)
        pivot = gamma

        def entries(vx, vy, vs):
            return vx, vs - pivot, pivot, vy

        member = _in_Sminus
        vx0, vy0 = gamma, gamma
    else:
        raise ValueError(f"unknown coset {second!r}")
    # each enumerated pair is a product of balls of radius v0 + N
    ball = Fraction(q0) ** (1 - (vx0 + N)) * Fraction(q0) ** (1 - (vy0 + N))
    total = Fraction(0)
    for (vx, vy, vs), count in hist.items():
        va, vb, vc, vd = entries(vx, vy, vs)
        if not member(va, vb, vc, vd, gamma):
            continue
        if label == "v":
            # representative diag(t^-delta, t^delta): bottom row t^delta (-c, a)
            vZ, vW = delta + vc, delta + va
        else:
            # representative [[0, t^-delta], [t^delta, 0]]: bottom row t^delta (d, -b)
            vZ, vW = delta + vd, delta + vb
        if _first_factor_ok(first, vZ, vW):
            total += count * ball
    return total * (q0 - 1)


def _ann(q0, g) -> Fraction:
    return (q0 - 1) * Fraction(q0) ** (-g)


def _structure_constants(q0: int, N: int, gamma: int) -> dict:
    q = Fraction(q0)
    A0 = q - 1
    out = {}
    # e_0 R_gamma = (v_0 S_gamma) / (A^0 * O_cl^0 O_o^0 A^gamma); e_d = v_{-d}/A^{-d}, f_d = u_d/A^d
    norm = A0 * q * _ann(q0, gamma)
    c = coset_measure(q0, N, "v0", "S", gamma, "v", -gamma)
    out[f"e0.R_{gamma}:e_{gamma}"] = c * _ann(q0, -gamma) / norm
    for delta in range(gamma + 1, -gamma + 1):
        c = coset_measure(q0, N, "v0", "S", gamma, "u", delta)
        out[f"e0.R_{gamma}:f_{delta}"] = c * _ann(q0, delta) / norm
    # f_0 R = (u_0 S^-_0) / (A^0 * O_cl^0 O_o^0 A^0)
    norm0 = A0 * q * A0
    out["f0.R:e_0"] = coset_measure(q0, N, "u0", "S-", 0, "v", 0) * A0 / norm0
    out["f0.R:f_0"] = coset_measure(q0, N, "u0", "S-", 0, "u", 0) * A0 / norm0
    out["e0.R:f_0"] = coset_measure(q0, N, "v0", "S-", 0, "u", 0) * A0 / norm0
    return out


def finite_oracle(q0: int, N: int, gamma: int = -1) -> dict:
    """Counted structure constants of e_0 . R_gamma, e_0 . R and f_0 . R.

    Raises TruncationError when the constants move between N and N + 1.
    """
    if q0 not in (2, 3, 4):
        raise ValueError("q0 must be 2, 3 or 4")
    if gamma >= 0:
        raise ValueError("gamma must be negative")
    if N > 4 or N < 1:
        raise ValueError("precision N must be in 1..4")
    if 2 * abs(gamma) + 1 > N:
        raise TruncationError("precision too small for this coset")
    here = _structure_constants(q0, N, gamma)
    deeper = _structure_constants(q0, N + 1, gamma)
    if here != deeper:
        raise TruncationError("structure constants depend on the truncation")
    return here


def symbolic_constants(gamma: int = -1) -> dict:
    """The table values as elements of E, same keys as finite_oracle."""
    out = {f"e0.R_{gamma}:e_{gamma}": ONE_E}
    for delta in range(gamma + 1, -gamma + 1):
        out[f"e0.R_{gamma}:f_{delta}"] = QM1 / Q_E
    out["f0.R:e_0"] = Q_E
    out["f0.R:f_0"] = QM1
    out["e0.R:f_0"] = ONE_E
    return out


# -- random corpus ------------------------------------------------------------------

def random_element(rnd: random.Random, depth: int = 1) -> HeckeElem:
    """Small random element: atoms, R-terms and interval densities."""
    pts = [Fraction(n, d) for n in range(-2, 3) for d in (1, 2)]
    kind = rnd.randrange(4)
    c = rnd.choice([1, 2, -1, Q_E, QM1])
    if kind == 0:
        X = HeckeElem.T(rnd.choice(pts), c)
    elif kind == 1:
        X = HeckeElem.T(rnd.choice(pts)) * HeckeElem.R()
        X = X.scale(c)
    elif kind == 2:
        lo = rnd.choice(pts)
        X = HeckeElem.integral(lo, lo + rnd.choice([Fraction(1, 2), 1]), c)
    else:
        lo = rnd.choice(pts)
        X = HeckeElem(None, DensityFn.interval(lo, lo + 1, c))
    if depth > 1:
        X = X + random_element(rnd, depth - 1)
    return X
