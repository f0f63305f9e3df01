"""Value-group arithmetic.

The base group A is Z^k with the lexicographic order (the first generator
dominates).  Elements of Q(x)A are exact rational k-vectors.  Finite
subgroups of (Q(x)A)/A are stored through the full-rank lattice
Z^k + span(gens), reduced to row Hermite normal form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class BaseGroup:
    rank: int
    divisible: bool = False

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")

    def scalar(self, *coords) -> "GammaScalar":
        s = GammaScalar(coords)
        if len(s) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(s)}")
        return s

    def generator(self, i: int) -> "GammaScalar":
        return GammaScalar(1 if j == i else 0 for j in range(self.rank))

    def zero(self) -> "GammaScalar":
        return GammaScalar([0] * self.rank)


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    return Fraction(v)


class GammaScalar(tuple):
    """An element of Q(x)A as a tuple of Fractions.

    Tuple comparison already is lexicographic, which is exactly the order
    on A = Z^k used throughout.
    """

    __slots__ = ()

    def __new__(cls, coords: Iterable = ()):
        return super().__new__(cls, (_frac(c) for c in coords))

    def __add__(self, other):
        _check_rank(self, other)
        return GammaScalar(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        _check_rank(self, other)
        return GammaScalar(a - b for a, b in zip(self, other))

    def __neg__(self):
        return GammaScalar(-a for a in self)

    def __mul__(self, c):
        c = _frac(c)
        return GammaScalar(a * c for a in self)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = _frac(c)
        return GammaScalar(a / c for a in self)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self)

    def sign(self) -> int:
        return lex_sign(self)

    def __repr__(self):
        return "[" + ", ".join(str(a) for a in self) + "]"


def _check_rank(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise ValueError(f"rank mismatch: {len(a)} vs {len(b)}")


def lex_sign(v: Sequence[Fraction]) -> int:
    for a in v:
        if a > 0:
            return 1
        if a < 0:
            return -1
    return 0


def compare(a: Sequence, b: Sequence) -> Ordering:
    _check_rank(a, b)
    s = lex_sign([_frac(x) - _frac(y) for x, y in zip(a, b)])
    return Ordering(s)


def frac_int_split(a: Sequence) -> tuple[GammaScalar, GammaScalar]:
    """Split a = f + z with f in [0,1)^k componentwise and z integral."""
    z = [math.floor(_frac(x)) for x in a]
    f = [_frac(x) - zi for x, zi in zip(a, z)]
    return GammaScalar(f), GammaScalar(z)


# -- lattices ---------------------------------------------------------------

def int_hnf(rows: Iterable[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row Hermite normal form: upper echelon, positive pivots, entries
    above each pivot reduced into [0, pivot)."""
    work = [list(r) for r in rows if any(r)]
    out: list[list[int]] = []
    pivots: list[int] = []
    for col in range(ncols):
        while True:
            nz = [r for r in work if r[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            for r in nz[1:]:
                q = r[col] // p[col]
                if q:
                    for j in range(col, ncols):
                        r[j] -= q * p[j]
            work = [r for r in work if any(r)]
        nz = [r for r in work if r[col] != 0]
        if not nz:
            continue
        p = nz[0]
        work.remove(p)
        if p[col] < 0:
            p = [-v for v in p]
        out.append(p)
        pivots.append(col)
    for i in range(len(out)):
        c = pivots[i]
        for prev in out[:i]:
            q = prev[c] // out[i][c]
            if q:
                for j in range(c, ncols):
                    prev[j] -= q * out[i][j]
    return out


@lru_cache(maxsize=200_000)
def lattice_hnf(gens: tuple, ncols: int) -> tuple:
    """Canonical basis of Z^ncols + span_Z(gens) as a tuple of Fraction rows."""
    den = 1
    for g in gens:
        for a in g:
            den = den * a.denominator // math.gcd(den, a.denominator)
    rows = [[den if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    rows += [[int(a * den) for a in g] for g in gens]
    h = int_hnf(rows, ncols)
    return tuple(tuple(Fraction(v, den) for v in r) for r in h)


def is_trivial_lattice(basis: tuple) -> bool:
    return all(all(a.denominator == 1 for a in r) for r in basis)


@dataclass(frozen=True)
class FiniteSubgroup:
    """A finite subgroup H of (Q(x)A)/A, held as the lattice A + H."""

    basis: tuple

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def order(self) -> int:
        n = 1
        for i, r in enumerate(self.basis):
            n *= r[i].denominator
        return n

    def is_trivial(self) -> bool:
        return self.order == 1

    def generators(self) -> list[GammaScalar]:
        """Nonintegral basis rows; they generate H modulo A."""
        return [GammaScalar(r) for r in self.basis if any(a.denominator != 1 for a in r)]

    def contains(self, a: Sequence) -> bool:
        a = [_frac(x) for x in a]
        return lattice_hnf(tuple(tuple(r) for r in self.basis) + (tuple(a),), self.rank) == self.basis

    def join(self, other: "FiniteSubgroup") -> "FiniteSubgroup":
        return FiniteSubgroup(lattice_hnf(self.basis + other.basis, self.rank))


def subgroup_canonical(gens: Iterable[Sequence], rank: int | None = None) -> FiniteSubgroup:
    gens = [tuple(_frac(a) for a in g) for g in gens]
    if rank is None:
        if not gens:
            raise ValueError("rank is required for an empty generator list")
        rank = len(gens[0])
    for g in gens:
        if len(g) != rank:
            raise ValueError("rank mismatch")
    return FiniteSubgroup(lattice_hnf(tuple(sorted(set(gens))), rank))


def parse_scalar(text: str, rank: int | None = None) -> GammaScalar:
    """Accept `[7/3, -1/2]` or a bare rational (rank 1)."""
    t = text.strip()
    if t.startswith("["):
        if not t.endswith("]"):
            raise ValueError(f"bad scalar {text!r}")
        parts = [p for p in t[1:-1].split(",") if p.strip()]
        s = GammaScalar(Fraction(p.strip()) for p in parts)
    else:
        s = GammaScalar([Fraction(t)])
    if rank is not None and len(s) != rank:
        raise ValueError(f"expected rank {rank}, got {len(s)}")
    return s


def format_scalar(s: Sequence[Fraction]) -> str:
    if len(s) == 1:
        return str(s[0])
    return "[" + ",".join(str(a) for a in s) + "]"
