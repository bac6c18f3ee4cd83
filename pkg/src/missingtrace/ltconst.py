"""Euler products for the Lang-Trotter constant of a prescribed Galois image.

For an open subgroup G of GL2(Z^) of level m_E and a trace r, the constant is

    C = (2/pi) * m_E |G(m_E)_r| / |G(m_E)| * prod_{l not dividing m_E} l |GL2(F_l)_r| / |GL2(F_l)|

where X_r denotes the elements of X with trace r.  Products are kept as exact
fractions; only the final multiplication by 2/pi is done in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import modarith as ma
from .grouplat import SubgroupSpec, tr_arr

ENUMERATION_CAP = 97
DEFAULT_DIGITS = 30


class PrimeTooLarge(ValueError):
    pass


@lru_cache(maxsize=None)
def _trace_histogram(ell: int) -> tuple[int, ...]:
    # For each (a, d) the number of (b, c) with bc != ad is ell^2 minus the
    # number of (b, c) with bc == ad, so one histogram of bc covers all cases.
    x = np.arange(ell, dtype=np.int64)
    bc = np.bincount((np.outer(x, x) % ell).ravel(), minlength=ell)
    ad = np.outer(x, x) % ell
    tr = (x[:, None] + x[None, :]) % ell
    good = ell * ell - bc[ad]
    return tuple(int(v) for v in np.bincount(tr.ravel(), weights=good.ravel(), minlength=ell))


def gl2_trace_count(ell: int, r: int, cap: int = ENUMERATION_CAP) -> int:
    """Number of g in GL2(F_ell) with tr g = r, by enumeration."""
    if not ma.is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    if ell > cap:
        raise PrimeTooLarge(f"enumeration is capped at l <= {cap}")
    return _trace_histogram(ell)[r % ell]


def trace_count_closed(ell: int, r: int) -> int:
    """Same count from the elementary closed form (used past the enumeration cap)."""
    return ell * ell * (ell - 1) if r % ell == 0 else ell * (ell * ell - ell - 1)


def euler_factor(ell: int, r: int) -> Fraction:
    if ell <= ENUMERATION_CAP:
        count = gl2_trace_count(ell, r)
    else:
        if not ma.is_prime(ell):
            raise ValueError(f"{ell} is not prime")
        count = trace_count_closed(ell, r)
    return Fraction(ell * count, ma.gl2_order(ell))


def zero_flag(G: SubgroupSpec, r: int, level: int | None = None) -> bool:
    """True iff some divisor d of the level has no element of trace r mod d."""
    level = G.gl2_level if level is None else level
    H = G.image(level)
    return any(r % d not in H.trace_set(d) for d in ma.divisors(level))


def _two_over_pi(digits: int) -> Decimal:
    with mpmath.workdps(digits + 20):
        return Decimal(mpmath.nstr(2 / mpmath.pi, digits + 15, strip_zeros=False))


def to_decimal(q: Fraction, digits: int = DEFAULT_DIGITS) -> Decimal:
    """(2/pi) q rounded to the given number of significant digits."""
    if q == 0:
        return Decimal(0)
    with localcontext() as ctx:
        ctx.prec = digits + 10
        v = _two_over_pi(digits) * Decimal(q.numerator) / Decimal(q.denominator)
        ctx.prec = digits
        return +v


@dataclass
class LTFactorization:
    m_E: int
    r: int
    bound: int
    group_ratio: Fraction
    euler_factors: list[tuple[int, Fraction]] = field(repr=False)
    zero: bool
    digits: int = DEFAULT_DIGITS

    @property
    def exact_product(self) -> Fraction:
        out = self.group_ratio
        for _, f in self.euler_factors:
            out *= f
        return out

    @property
    def truncated_value(self) -> Decimal:
        return to_decimal(self.exact_product, self.digits)

    def partial_products(self) -> list[tuple[int, Decimal]]:
        """Truncated values after each prime, for convergence plots."""
        out, acc = [], self.group_ratio
        for ell, f in self.euler_factors:
            acc *= f
            out.append((ell, to_decimal(acc, 12)))
        return out

    def to_dict(self) -> dict:
        return {
            "m_E": self.m_E,
            "r": self.r,
            "L": self.bound,
            "group_ratio": str(self.group_ratio),
            "euler_factors": [[ell, str(f)] for ell, f in self.euler_factors],
            "zero": self.zero,
            "truncated_value": str(self.truncated_value),
        }


def lt_truncated(G: SubgroupSpec, r: int, L: int, digits: int = DEFAULT_DIGITS) -> LTFactorization:
    """Truncate the Euler product at primes l <= L; m_E is taken to be gl2_level(G)."""
    m_E = G.gl2_level
    H = G.image(m_E)
    hits = int((tr_arr(H.elements, m_E) == r % m_E).sum()) if m_E > 1 else H.order
    ratio = Fraction(m_E * hits, H.order)
    factors = [(ell, euler_factor(ell, r)) for ell in ma.primes_upto(L) if m_E % ell]
    return LTFactorization(m_E, r, L, ratio, factors, zero_flag(G, r, m_E), digits)
