"""Target ring for volumes of valued-field sets.

Elements are rational functions in q~ (written qt), user-declared variety
symbols, the x_i and the q_i (fractional q-exponents allowed).  Variety
symbols are free; A1 and Gm are reserved for the affine line (= qt) and the
multiplicative group (= qt - 1).  Allowed denominators are powers of qt, the
factors of 1 - qt^-m and the factors of 1 - q^(M a0); `check_denominators`
verifies that.

Convention for q-exponents: the symbol q^a is the formal image of q(a), so
q^(a0) is the element the localization (1 - q^(M a0))^-1 refers to.  Other
sources abbreviate this by q^-M; no sign flip is applied here.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Sequence

import sympy

from .convring import THETA, ConvElem, psi_star
from .gamma import GammaScalar
from .gring import GRingElem, psi_hom, x_symbols
from .ratfn import RatFn, field_for, q_symbols

QT = sympy.Symbol("qt")
RESERVED = {"A1": QT, "Gm": QT - 1, "pt": sympy.Integer(1)}


class VFTarget:
    """Declares the rank, a0 and the free variety symbols."""

    def __init__(self, rank: int = 1, varieties: Sequence[str] = (), a0=None):
        self.rank = rank
        bad = [v for v in varieties if v in RESERVED or v in ("qt", "theta") or v.startswith(("x", "q"))]
        if bad:
            raise ValueError(f"variety names clash with reserved symbols: {bad}")
        self.varieties = tuple(varieties)
        self.head = (QT,) + tuple(sympy.Symbol(v) for v in self.varieties)
        a0 = a0 if a0 is not None else (1,) + (0,) * (rank - 1)
        self.a0 = tuple(Fraction(x) for x in a0)

    def __repr__(self):
        return f"VFTarget(rank={self.rank}, varieties={self.varieties})"

    def from_expr(self, expr) -> "VFTargetElem":
        expr = sympy.sympify(expr)
        expr = expr.subs({sympy.Symbol(n): v for n, v in RESERVED.items()})
        return VFTargetElem.from_expr(expr, self.head, self.rank)

    def one(self) -> "VFTargetElem":
        return self.from_expr(1)

    def qt(self) -> "VFTargetElem":
        return self.from_expr(QT)

    def variety(self, name: str) -> "VFTargetElem":
        if name in RESERVED:
            return self.from_expr(RESERVED[name])
        if name not in self.varieties:
            raise KeyError(f"undeclared variety symbol {name!r}")
        return self.from_expr(sympy.Symbol(name))

    def x(self, i: int) -> "VFTargetElem":
        return self.from_expr(x_symbols(self.rank)[i])

    def q(self, a) -> "VFTargetElem":
        if isinstance(a, (int, Fraction)):
            a = (a,) + (0,) * (self.rank - 1)
        expr = sympy.Integer(1)
        for ai, qi in zip(a, q_symbols(self.rank)):
            ai = Fraction(ai)
            expr *= qi ** sympy.Rational(ai.numerator, ai.denominator)
        return self.from_expr(expr)


class VFTargetElem(RatFn):
    def __init__(self, head, k, D, frac):
        super().__init__(head, k, D, frac)


def from_convring(f: ConvElem, target: VFTarget) -> VFTargetElem:
    """theta -> qt/(qt - 1); q(a) -> q^a; coefficients through psi."""
    if target.rank != f.ring.rank:
        raise ValueError("rank mismatch")
    if f.ring.a0 != target.a0:
        raise ValueError("a0 of the convolution ring differs from the target's")
    img = psi_star(f)
    K, us = field_for(target.head, target.rank, img.D)
    g = K.gens
    nh = len(target.head)
    qt = g[0]
    images = {0: (qt / (qt - 1)).as_expr()}
    for i in range(target.rank):
        images[1 + i] = g[nh + i].as_expr()
        images[1 + target.rank + i] = g[nh + target.rank + i].as_expr()
    old = [s.as_expr() for s in img.frac.field.gens]
    sub = {old[i]: e for i, e in images.items()}
    num = img.frac.numer.as_expr().subs(sub, simultaneous=True)
    den = img.frac.denom.as_expr().subs(sub, simultaneous=True)
    out = VFTargetElem(target.head, target.rank, img.D, K.from_expr(num) / K.from_expr(den))
    if not check_denominators(out, target):
        raise ValueError("image needs a localization outside the declared set")
    return out


def xi_relation_holds(target: VFTarget) -> bool:
    """[1]/[Gm] (x) 1 equals 1 (x) (theta - 1) under theta -> qt/(qt-1)."""
    lhs = target.one() / target.variety("Gm")
    rhs = target.from_expr(QT / (QT - 1) - 1)
    return lhs == rhs


def _is_allowed_factor(p: sympy.Expr, target: VFTarget, D: int) -> bool:
    """p is qt, a u_i, a factor of qt^m - 1, or a factor of 1 - q^(M a0)."""
    _, us = field_for(target.head, target.rank, D)
    syms = p.free_symbols
    if p in (QT,) + tuple(us):
        return True
    if syms == {QT}:
        poly = sympy.Poly(p, QT)
        for m in range(1, 4 * poly.degree() + 2):
            if sympy.rem(sympy.Poly(QT ** m - 1, QT), poly).is_zero:
                return True
        return False
    if syms and syms <= set(us):
        # must divide 1 - prod u_i^(D M a0_i) for some M
        expo = [int(x * D) for x in target.a0]
        if any(e < 0 for e in expo):
            return False
        total = sympy.Poly(p, *us).total_degree()
        for M in range(1, total + 2):
            mono = sympy.Integer(1)
            for u, e in zip(us, expo):
                mono *= u ** (M * e)
            if sympy.rem(sympy.Poly(1 - mono, *us), sympy.Poly(p, *us)).is_zero:
                return True
        return False
    return False


def check_denominators(u: VFTargetElem, target: VFTarget) -> bool:
    den = u.frac.denom.as_expr()
    _, factors = sympy.factor_list(den)
    return all(_is_allowed_factor(p, target, u.D) for p, _ in factors)


def ramified_base_change(u: VFTargetElem, multipliers: Sequence[int]) -> VFTargetElem:
    """Pass to generators gamma_i / m_i: x_i -> m_i x_i, q_i -> q_i^(m_i)."""
    ms = list(multipliers)
    if len(ms) != u.k or any(int(m) != m or m < 1 for m in ms):
        raise ValueError("one positive integer multiplier per generator")
    if all(m == 1 for m in ms):
        return u
    K, us = field_for(u.head, u.k, u.D)
    g = K.gens
    nh = len(u.head)
    images = {}
    for i, m in enumerate(ms):
        images[nh + i] = (m * g[nh + i]).as_expr()
        images[nh + u.k + i] = (g[nh + u.k + i] ** m).as_expr()
    return u.substitute(images)


def filtration_degree(u: VFTargetElem):
    """(gamma, strict): u lies in F_c for every c < gamma, i.e. gamma is the
    lowest q-exponent of its expansion; (inf, False) for 0."""
    order = u.q_order()
    if order is None:
        return float("inf"), False
    return GammaScalar(order), True


# -- generator-level maps -----------------------------------------------------

def t_symbols(k: int) -> list:
    return list(sympy.symbols(f"t1:{k + 1}"))


def lf_generators(target: VFTarget, i: int):
    """Images of t_i and q_i: the class 1 (x) x_i and the symbol q^(gamma_i)."""
    unit = tuple(1 if j == i else 0 for j in range(target.rank))
    return target.x(i), target.q(unit)


def L_F(poly, target: VFTarget) -> VFTargetElem:
    """Polynomial in t_i, q_i (q-exponents may be fractional) -> target."""
    ts, qs = t_symbols(target.rank), q_symbols(target.rank)
    poly = sympy.sympify(poly)
    names = {s.name: s for s in qs}
    poly = poly.subs({s: names[s.name] for s in poly.free_symbols if s.name in names})
    xs = x_symbols(target.rank)
    return target.from_expr(poly.subs(dict(zip(ts, xs)), simultaneous=True))


def I_F(u: VFTargetElem, target: VFTarget):
    """Inverse of L_F on its image; raises if u involves qt or varieties."""
    e = sympy.expand(u.as_expr())
    if any(s in e.free_symbols for s in target.head):
        raise ValueError("element is not in the image of the generator map")
    xs, ts = x_symbols(target.rank), t_symbols(target.rank)
    return sympy.expand(e.subs(dict(zip(xs, ts)), simultaneous=True))


def round_trip_check(target: VFTarget, samples: int = 20, seed: int = 0) -> bool:
    ts, qs = t_symbols(target.rank), q_symbols(target.rank)
    rnd = random.Random(seed)
    cases = [sympy.Integer(1)] + ts + qs
    for _ in range(samples):
        p = sympy.Integer(0)
        for _ in range(rnd.randint(1, 4)):
            mono = sympy.Integer(rnd.randint(-5, 5))
            for t in ts:
                mono *= t ** rnd.randint(0, 3)
            for q in qs:
                mono *= q ** sympy.Rational(rnd.randint(-3, 6), rnd.choice([1, 2, 3]))
            p += mono
        cases.append(p)
    for p in cases:
        if sympy.simplify(I_F(L_F(p, target), target) - sympy.expand(p)) != 0:
            return False
    return True


# -- presentation of the residue-side ring -------------------------------------

class RVPresentation:
    """Assigns to each gamma the class of the fibre rv^-1(gamma) over Gm.

    The default is the divisible-mode presentation, where every fibre is a
    Gm-torsor, so the ratio is 1.
    """

    def __init__(self, target: VFTarget, fibre_class: Callable | None = None):
        self.target = target
        self.fibre_class = fibre_class or (lambda gamma: target.variety("Gm"))

    def ratio(self, gamma) -> VFTargetElem:
        return self.fibre_class(gamma) / self.target.variety("Gm")


def rv_presentation_relation_check(presentation: RVPresentation, gammas=None) -> bool:
    """[rv^-1(gamma)]/[Gm] must agree with the image of e(gamma) (psi sends
    e(gamma) to 1 in divisible mode)."""
    target = presentation.target
    k = target.rank
    if gammas is None:
        gammas = [tuple(Fraction(n, d) if j == 0 else Fraction(0) for j in range(k))
                  for n in range(-3, 4) for d in (1, 2, 3)]
    for g in gammas:
        e_img = target.from_expr(psi_hom(GRingElem.e(g), x_symbols(k)))
        if presentation.ratio(g) != e_img:
            return False
    return True
