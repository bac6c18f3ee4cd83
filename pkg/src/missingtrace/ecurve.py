"""Elliptic curves over Q from the catalog families.

A curve is held in short form y^2 = x^3 + A x + B with rational A, B.  Curves
given in long Weierstrass form keep their original coefficients so that bad
primes, and a_p at p = 2 and 3, refer to the long model.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import isqrt
from typing import Sequence

import numpy as np
import sympy

from . import modarith as ma
from .qpoly import RatExpr, eval_expr, squarefree_part

MAX_PRIME = 1 << 21


class BadPrime(ValueError):
    pass


class SingularSpecialization(ValueError):
    pass


@dataclass(frozen=True)
class CurveInstance:
    A: Fraction
    B: Fraction
    long: tuple[Fraction, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "A", Fraction(self.A))
        object.__setattr__(self, "B", Fraction(self.B))
        if self.disc == 0:
            raise SingularSpecialization(f"singular curve A={self.A}, B={self.B}")

    @classmethod
    def from_long(cls, a1, a2, a3, a4, a6) -> "CurveInstance":
        a1, a2, a3, a4, a6 = (Fraction(v) for v in (a1, a2, a3, a4, a6))
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        c4 = b2 * b2 - 24 * b4
        c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
        return cls(-27 * c4, -54 * c6, (a1, a2, a3, a4, a6))

    @property
    def disc(self) -> Fraction:
        return -16 * (4 * self.A**3 + 27 * self.B**2)

    @property
    def j(self) -> Fraction:
        return -1728 * (4 * self.A) ** 3 / self.disc

    @cached_property
    def long_disc(self) -> Fraction | None:
        if self.long is None:
            return None
        a1, a2, a3, a4, a6 = self.long
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def _bad_product(self) -> int:
        """Integer whose prime divisors are exactly the bad primes."""
        if self.long is not None:
            n = self.long_disc.numerator * self.long_disc.denominator
            for a in self.long:
                n *= a.denominator
            return abs(n)
        return abs(6 * self.disc.numerator * self.disc.denominator * self.A.denominator * self.B.denominator)

    def is_good(self, p: int) -> bool:
        return self._bad_product() % p != 0

    @cached_property
    def bad_primes(self) -> tuple[int, ...]:
        return tuple(sorted(int(p) for p in sympy.factorint(self._bad_product())))

    def to_dict(self) -> dict:
        out = {"A": str(self.A), "B": str(self.B), "disc": str(self.disc), "j": str(self.j)}
        if self.long is not None:
            out["long"] = [str(a) for a in self.long]
        return out


def weierstrass_coeffs(j: Fraction) -> tuple[Fraction, Fraction]:
    if j in (0, 1728):
        raise SingularSpecialization(f"j = {j} is excluded")
    return 108 * j / (1728 - j), 432 * j / (1728 - j)


def generic_curve(j: RatExpr, t0, D0) -> CurveInstance:
    """y^2 = x^3 + D0^2 a4(t0) x + D0^3 a6(t0) for the given j-map."""
    a4, a6 = weierstrass_coeffs(eval_expr(j, t0))
    D0 = Fraction(D0)
    if D0 == 0:
        raise SingularSpecialization("twist value is zero")
    return CurveInstance(D0 * D0 * a4, D0**3 * a6)


def specialize(family, t0, D0=1) -> CurveInstance:
    """The member of a family at (t0, D0), twist absorbed into the short model."""
    return generic_curve(family.j, t0, eval_expr(family.d, t0, D0))


# point counting -------------------------------------------------------------------

@lru_cache(maxsize=64)
def _chi_table(p: int) -> np.ndarray:
    x = np.arange(p, dtype=np.int64)
    chi = np.full(p, -1, dtype=np.int8)
    chi[(x * x) % p] = 1
    chi[0] = 0
    return chi


def _mod(q: Fraction, p: int) -> int:
    return q.numerator * pow(q.denominator, -1, p) % p


def _ap_short(A: int, B: int, p: int) -> int:
    x = np.arange(p, dtype=np.int64)
    f = ((x * x % p) * x + A * x + B) % p
    return -int(_chi_table(p)[f].sum(dtype=np.int64))


def _ap_long_brute(coeffs: Sequence[Fraction], p: int) -> int:
    a1, a2, a3, a4, a6 = (_mod(a, p) for a in coeffs)
    count = 1
    for x in range(p):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                count += 1
    return p + 1 - count


def ap(curve: CurveInstance, p: int) -> int:
    if not ma.is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p > MAX_PRIME:
        raise ValueError(f"p = {p} exceeds the point-counting cap {MAX_PRIME}")
    if not curve.is_good(p):
        raise BadPrime(f"{p} is a bad prime")
    if p <= 3:
        if curve.long is None:
            raise BadPrime(f"a_{p} needs a long Weierstrass model")
        a = _ap_long_brute(curve.long, p)
    else:
        a = _ap_short(_mod(curve.A, p), _mod(curve.B, p), p)
    assert a * a <= 4 * p, f"Hasse bound violated at p={p}"
    return a


@dataclass
class TraceCensus:
    modulus: int
    bound: int
    counts: dict[int, int]
    sequence: list[int]
    primes: list[int]

    @property
    def missing(self) -> list[int]:
        return [r for r in range(self.modulus) if self.counts[r] == 0]

    def to_dict(self) -> dict:
        return {
            "modulus": self.modulus,
            "bound": self.bound,
            "primes": self.primes,
            "sequence": self.sequence,
            "counts": {str(r): n for r, n in sorted(self.counts.items())},
            "missing": self.missing,
        }


def census_primes(curve: CurveInstance, X: int) -> list[int]:
    """Good primes up to X; 2 and 3 only when a long model is attached."""
    low = 2 if curve.long is not None else 5
    return [p for p in ma.primes_upto(X) if p >= low and curve.is_good(p)]


def trace_census(curve: CurveInstance, m: int, X: int, threads: int = 1) -> TraceCensus:
    if m < 2:
        raise ValueError("modulus must be at least 2")
    primes = census_primes(curve, X)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            traces = list(pool.map(lambda p: ap(curve, p), primes))
    else:
        traces = [ap(curve, p) for p in primes]
    seq = [a % m for a in traces]
    counts = {r: 0 for r in range(m)}
    for r in seq:
        counts[r] += 1
    return TraceCensus(m, X, counts, seq, primes)


# division polynomials -------------------------------------------------------------

_X = sympy.Symbol("x")


def _qq(v: Fraction):
    return sympy.Rational(v.numerator, v.denominator)


def _division_polys(A: Fraction, B: Fraction, n: int) -> list[sympy.Poly]:
    """f_k for k <= n with psi_k = f_k (k odd) and psi_k = y f_k (k even)."""
    P = lambda e: sympy.Poly(e, _X, domain="QQ")
    a, b = _qq(A), _qq(B)
    x = _X
    F = P(x**3 + a * x + b)
    F2 = F * F
    f = [P(0), P(1), P(2), P(3 * x**4 + 6 * a * x**2 + 12 * b * x - a * a),
         P(4 * (x**6 + 5 * a * x**4 + 20 * b * x**3 - 5 * a * a * x**2 - 4 * a * b * x - 8 * b * b - a**3))]
    for k in range(5, n + 1):
        mm = k // 2
        if k % 2:
            if mm % 2 == 0:
                f.append(F2 * f[mm + 2] * f[mm] ** 3 - f[mm - 1] * f[mm + 1] ** 3)
            else:
                f.append(f[mm + 2] * f[mm] ** 3 - F2 * f[mm - 1] * f[mm + 1] ** 3)
        else:
            f.append((f[mm] * (f[mm + 2] * f[mm - 1] ** 2 - f[mm - 2] * f[mm + 1] ** 2)).quo_ground(2))
    return f


def division_poly(curve: CurveInstance, n: int, p: int | None = None) -> sympy.Poly:
    """psi_n in x over Q, or over F_p when p is given (psi_n / y for even n)."""
    if not 2 <= n <= 9:
        raise ValueError("n must lie in 2..9")
    if p is not None:
        if n % p == 0:
            raise ValueError(f"characteristic {p} divides {n}")
        if curve.A.denominator % p == 0 or curve.B.denominator % p == 0:
            raise BadPrime(f"{p} divides a coefficient denominator")
    psi = _division_polys(curve.A, curve.B, n)[n]
    if p is None:
        return psi
    return sympy.Poly([_mod(Fraction(int(c.p), int(c.q)), p) for c in psi.all_coeffs()], _X, modulus=p)


def factor_poly(coeffs: Sequence[Fraction]) -> sympy.Poly:
    return sympy.Poly([_qq(Fraction(c)) for c in coeffs], _X, domain="QQ")


def verify_torsion_factor(j: RatExpr, n: int, factor: Sequence[RatExpr], samples) -> bool:
    """True iff the monic factor (coefficients in t, D, leading first) divides psi_n
    of the model y^2 = x^3 + D^2 a4(t) x + D^3 a6(t) at every sample (t0, D0)."""
    for t0, D0 in samples:
        curve = generic_curve(j, t0, D0)
        g = factor_poly([eval_expr(c, t0, D0) for c in factor])
        if not division_poly(curve, n).rem(g).is_zero:
            return False
    return True


def quad_subfield_of_point(curve: CurveInstance, x0) -> int:
    """Squarefree d with Q(y0) = Q(sqrt d) for a point with x-coordinate x0."""
    x0 = Fraction(x0)
    v = x0**3 + curve.A * x0 + curve.B
    if v == 0:
        raise ValueError("x0 is the x-coordinate of a 2-torsion point")
    return squarefree_part(v)


def delta_field_checks(curve: CurveInstance) -> dict:
    return {"sqrt_disc_field": squarefree_part(curve.disc)}


def rational_roots(poly: sympy.Poly) -> list[Fraction]:
    return sorted(Fraction(int(r.p), int(r.q)) for r in sympy.roots(poly, filter="Q").keys()
                  if r.is_Rational)


def hasse_ok(a: int, p: int) -> bool:
    return a * a <= 4 * p and abs(a) <= 2 * isqrt(p) + 2
