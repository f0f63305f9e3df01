"""Named check suites: each returns a list of CheckResult lines.

Used by `motivic check <suite>` and by the acceptance tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .convring import (THETA, ConvRing, ThetaPoly, pointwise_eval, psi_map, psi_star, theta_closed_form,
                       theta_reduce)
from .corpus import polytope_corpus, random_unbounded
from .gamma import BaseGroup
from .gring import GRingElem, compare, count_hom, euler_unbounded, format_elem, x_symbols
from .polytope import count_lattice, dimension, euclid_volume
from .ratfn import q_symbols
from .volume import c_poly, class_of, integrate_fn, leading_volume


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        tail = f"  ({self.detail})" if self.detail else ""
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}{tail}"


@dataclass
class JobConfig:
    rank: int = 1
    spec: tuple | None = None
    a0: tuple | None = None
    m_range: tuple = (1, 8)
    q0_list: tuple = (2, 3)
    N: int = 3
    divisible: bool = True
    mode: str = "exact"
    varieties: tuple = ()
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("exact", "graded"):
            raise ValueError("mode must be exact or graded")
        if self.a0 is not None and not tuple(Fraction(a) for a in self.a0) > (0,) * len(self.a0):
            raise ValueError("a0 must be positive")
        if self.spec is not None:
            self.spec = tuple(Fraction(str(s)) for s in self.spec)
            if len(self.spec) != self.rank:
                raise ValueError("one specialization value per generator")
        lo, hi = self.m_range
        if not 1 <= lo <= hi:
            raise ValueError("m-range must satisfy 1 <= a <= b")

    @property
    def ms(self) -> range:
        return range(self.m_range[0], self.m_range[1] + 1)

    @classmethod
    def from_dict(cls, doc: dict) -> "JobConfig":
        known = {k: doc[k] for k in cls.__dataclass_fields__ if k in doc and k != "extra"}
        for key in ("spec", "a0", "m_range", "q0_list", "varieties"):
            if key in known and known[key] is not None:
                known[key] = tuple(known[key])
        extra = {k: v for k, v in doc.items() if k not in known}
        return cls(**known, extra=extra)


# -- polytope classes -----------------------------------------------------------

def check_counts(cfg: JobConfig) -> list:
    corpus = polytope_corpus()
    bad = []
    checked = 0
    for idx, (X, specs) in enumerate(corpus):
        u = class_of(X)
        for sp in specs:
            for m in cfg.ms:
                checked += 1
                if count_lattice(X, m, sp) != count_hom(u, m, sp):
                    bad.append((idx, sp, m))
    n2 = sum(1 for X, _ in corpus if X.rank == 2)
    detail = f"{len(corpus)} sets, {n2} of rank 2, {checked} comparisons"
    if bad:
        detail += f", first mismatch {bad[0]}"
    return [CheckResult("lattice counts agree with count_m of the class", not bad, detail)]


def check_volume(cfg: JobConfig) -> list:
    bad, n = [], 0
    for idx, (X, specs) in enumerate(polytope_corpus()):
        if not X.cells or dimension(X) != X.ambient:
            continue
        u = class_of(X)
        for sp in specs:
            n += 1
            if euclid_volume(X, sp) != leading_volume(u, X.ambient, sp or (1,)):
                bad.append((idx, sp))
    return [CheckResult("top filtration part gives the Euclidean volume", not bad,
                        f"{n} full-dimensional cases" + (f", first mismatch {bad[0]}" if bad else ""))]


def check_c_calculus(cfg: JobConfig) -> list:
    out = []
    for b in (Fraction(1), Fraction(2), Fraction(5, 2), Fraction(7, 3)):
        bad = []
        for n in range(6):
            lhs = integrate_fn(c_poly(n, (0, 1)), [0], [b])
            rhs = c_poly(n + 1, (b,))
            bad += [(n, m) for m in cfg.ms if count_hom(lhs, m) != count_hom(rhs, m)]
        out.append(CheckResult(f"integral of C_n over [0,{b}) is C_(n+1)", not bad,
                               f"n<=5, m in {cfg.m_range[0]}..{cfg.m_range[1]}" + (f", bad {bad[:3]}" if bad else "")))
    return out


def example_element() -> GRingElem:
    """int_0^s int_0^t (e(x/2)-1)(e(y/2)-1)(e((x-y)/2)-1) dy dx, with s, t
    the two value-group generators."""
    h = Fraction(1, 2)
    f = (GRingElem.e([0, 0, h, 0]) - 1) * (GRingElem.e([0, 0, 0, h]) - 1) * (GRingElem.e([0, 0, h, -h]) - 1)
    inner = integrate_fn(f, [0, 0], [0, 1])
    return integrate_fn(inner, [0], [1, 0])


def check_example_counts(cfg: JobConfig) -> list:
    u = example_element()
    specs = [(s, t) for s in range(-4, 5) for t in range(-4, 5)]
    bad = [(sp, m) for sp in specs for m in cfg.ms if count_hom(u, m, sp) != 0]
    verdict = compare(u, GRingElem.zero(2))
    return [
        CheckResult("example is count-null", not bad,
                    f"s,t in -4..4, m in {cfg.m_range[0]}..{cfg.m_range[1]}" + (f", first nonzero {bad[0]}" if bad else "")),
        CheckResult("example has a nonzero normal form", not u.is_zero(), format_elem(u)),
        CheckResult("comparator does not report equal to zero", verdict.verdict != "equal", verdict.verdict),
    ]


# -- convolution ring -------------------------------------------------------------

def check_theta(cfg: JobConfig) -> list:
    R = ConvRing()
    t1 = R.theta(1)
    out = []
    bad_sym, bad_pt = [], []
    for n in range(1, 5):
        tn, tn1 = theta_reduce(n), theta_reduce(n + 1)
        if sympy.cancel(tn1 * (THETA + tn - 1) - tn * THETA) != 0:
            bad_sym.append(n)
        if psi_star(R.theta(n)) != ThetaPoly.from_expr(tn):
            bad_sym.append(("psi", n))
        diff = R.theta(n + 1) * (t1 + R.theta(n) - 1) - R.theta(n) * t1
        bad_pt += [(n, g) for g in range(13) if count_hom(pointwise_eval(diff, g), 1) != 0]
    out.append(CheckResult("theta recursion as rational functions", not bad_sym, f"bad {bad_sym}" if bad_sym else "n<=4"))
    out.append(CheckResult("theta recursion pointwise under count_1", not bad_pt,
                           f"bad {bad_pt[:3]}" if bad_pt else "n<=4, gamma in 0..12"))
    bad_cf = [n for n in range(1, 7)
              if sympy.cancel(1 - 1 / theta_reduce(n) - (1 - 1 / THETA) ** n) != 0
              or sympy.cancel(theta_reduce(n) - theta_closed_form(n)) != 0]
    out.append(CheckResult("1 - theta_n^-1 = (1 - theta^-1)^n", not bad_cf, f"bad {bad_cf}" if bad_cf else "n<=6"))
    return out


def random_theta_monomial(rnd: random.Random, k: int = 1):
    xs, qs = x_symbols(k), q_symbols(k)
    mono = sympy.Integer(rnd.choice([1, 2, 3, -1, -2])) / rnd.choice([1, 1, 2, 3])
    for x in xs:
        mono *= x ** rnd.randint(0, 3)
    for q in qs:
        mono *= q ** sympy.Rational(rnd.randint(-4, 4), rnd.choice([1, 2, 3]))
    return mono * THETA ** rnd.randint(0, 3)


def check_round_trips(cfg: JobConfig) -> list:
    from .vftarget import VFTarget, round_trip_check

    rnd = random.Random(cfg.seed)
    R = ConvRing()
    bad = []
    for _ in range(100):
        p = random_theta_monomial(rnd)
        if psi_star(psi_map(p, R)) != ThetaPoly.from_expr(p):
            bad.append(p)
    target = VFTarget(rank=1)
    return [
        CheckResult("psi* after psi is the identity", not bad, f"100 monomials" + (f", bad {bad[0]}" if bad else "")),
        CheckResult("I_F after L_F is the identity", round_trip_check(target, samples=20, seed=cfg.seed), "generators and 20 polynomials"),
    ]


# -- Hecke algebra -----------------------------------------------------------------

def hecke_center_samples(rnd: random.Random):
    from .hecke import DensityFn, HeckeElem, Q_E, QM1

    pts = [Fraction(n, d) for n in range(1, 4) for d in (1, 2)]
    coeffs = [1, 2, -1, Q_E, QM1]
    sym, asym = [], []
    for i in range(10):
        a = rnd.choice(pts)
        c = rnd.choice(coeffs)
        if i % 2 == 0:
            X = HeckeElem.T(a, c) + HeckeElem.T(-a, c)
        else:
            X = HeckeElem(DensityFn.interval(-a, a, c, lo_closed=True, hi_closed=True))
        X = X + HeckeElem.scalar(rnd.choice(coeffs))
        sym.append(X)
        kind = i % 3
        if kind == 0:
            Y = HeckeElem.T(a, c)
        elif kind == 1:
            Y = X + HeckeElem.T(a, c)
        else:
            Y = X + HeckeElem.R()
        asym.append(Y)
    return sym, asym


def check_hecke(cfg: JobConfig, include_closed_form_kernel: bool = True) -> list:
    from .hecke import (HeckeElem, Q_E, QM1, center_membership, check_J_relations, random_element,
                        resolvent_G, verify_G)

    R, T = HeckeElem.R(), HeckeElem.T
    out = [CheckResult("quadratic relation R*R = (q-1)R + q", R * R == R.scale(QM1) + Q_E, str(R * R))]
    bad = []
    for a in (2, 1, Fraction(1, 2), Fraction(-1, 2), -1, -2):
        a = Fraction(a)
        corr = HeckeElem.integral(-a, a, QM1) if a > 0 else -HeckeElem.integral(a, -a, QM1)
        if R * T(a) != T(-a) * R + corr:
            bad.append(a)
    out.append(CheckResult("Bernstein relation", not bad, f"bad {bad}" if bad else "a in +-2, +-1, +-1/2"))

    rnd = random.Random(cfg.seed)
    sym, asym = hecke_center_samples(rnd)
    ok_sym = [center_membership(Z) for Z in sym]
    ok_asym = [not center_membership(Z) for Z in asym]
    out.append(CheckResult("symmetric samples are central", all(ok_sym), f"{sum(ok_sym)}/10"))
    out.append(CheckResult("asymmetric samples are not central", all(ok_asym), f"{sum(ok_asym)}/10"))

    bad = 0
    for _ in range(50):
        X, Y, Z = (random_element(rnd, 2) for _ in range(3))
        bad += (X * Y) * Z != X * (Y * Z)
    out.append(CheckResult("associativity", bad == 0, f"{50 - bad}/50 triples"))

    pairs = [(Fraction(a), Fraction(b)) for a, b in
             [(1, 1), (-1, 1), (2, 1), (Fraction(1, 2), Fraction(1, 3)), (-2, 3), (Fraction(-1, 2), 2),
              (3, Fraction(1, 2)), (Fraction(3, 2), 1), (-3, Fraction(2, 3)), (Fraction(1, 3), Fraction(5, 2))]]
    out.append(CheckResult("J_b T_a = T_-a J_b", check_J_relations(pairs), "10 pairs"))

    zs = (-3, -1, Fraction(-1, 2))
    if include_closed_form_kernel:
        res = {z: verify_G(z) for z in zs}
        out.append(CheckResult("verify_G with the closed-form kernel",
                               all(r.is_zero() for r in res.values()),
                               "; ".join(f"z={z}: {r}" for z, r in res.items())))
    rg = resolvent_G()
    res = {z: verify_G(z, rg) for z in zs}
    out.append(CheckResult("verify_G with the derived resolvent", all(r.is_zero() for r in res.values()),
                           "z in -3, -1, -1/2"))
    return out


def check_hecke_oracle(cfg: JobConfig) -> list:
    from .hecke import finite_oracle, symbolic_constants

    out = []
    sym = symbolic_constants(-1)
    for q0 in cfg.q0_list:
        got = finite_oracle(q0, cfg.N, -1)
        want = {k: v.at(q=q0) for k, v in sym.items()}
        bad = [k for k in want if got.get(k) != want[k]]
        out.append(CheckResult(f"counted structure constants at q={q0}, N={cfg.N}", not bad,
                               ", ".join(f"{k}={got[k]}" for k in sorted(got))))
    return out


def check_euler(cfg: JobConfig) -> list:
    from .gring import UnboundedElem

    group = BaseGroup(1, divisible=True)
    rnd = random.Random(cfg.seed)
    corpus = [random_unbounded(rnd) for _ in range(48)] + [UnboundedElem.ray(1), UnboundedElem.ray(1, open_ray=True)]
    out = []
    values = {}
    for sv in ("+", "-"):
        chi = lambda u: euler_unbounded(u, sv, group)
        values[sv] = [chi(u) for u in corpus]
        bad = 0
        for i in range(len(corpus)):
            u, v = corpus[i], corpus[(7 * i + 3) % len(corpus)]
            bad += chi(u + v) != chi(u) + chi(v)
            bad += chi(u * v) != chi(u) * chi(v)
        bad += chi(UnboundedElem(GRingElem.const(1))) != 1
        out.append(CheckResult(f"Euler characteristic {sv} is a ring homomorphism", bad == 0,
                               f"{len(corpus)} elements"))
    differ = sum(a != b for a, b in zip(values["+"], values["-"]))
    out.append(CheckResult("the two characteristics differ", differ > 0, f"differ on {differ}/{len(corpus)}"))
    return out


SUITES = {
    "counts": check_counts,
    "volume": check_volume,
    "c-calculus": check_c_calculus,
    "example-counts": check_example_counts,
    "theta": check_theta,
    "round-trips": check_round_trips,
    "hecke": check_hecke,
    "hecke-oracle": check_hecke_oracle,
    "euler": check_euler,
}


def run_suite(name: str, cfg: JobConfig | None = None) -> list:
    cfg = cfg or JobConfig()
    if name == "all":
        return [r for fn in SUITES.values() for r in fn(cfg)]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](cfg)
