"""Arithmetic in Z/mZ and on 2x2 matrices over it.

Matrices are immutable value objects.  Internally the rest of the package
mostly works with the packed integer code returned by :func:`pack`, which
encodes the four entries in mixed radix ``m``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt

MAX_MODULUS = 2**32


class ModulusMismatch(ValueError):
    pass


class NonUnitDeterminant(ValueError):
    pass


class BadFactorization(ValueError):
    pass


class NotDivisor(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class ResidueMatrix:
    m: int
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        m = self.m
        if not 1 <= m <= MAX_MODULUS:
            raise ValueError(f"modulus out of range: {m}")
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) % m)

    @classmethod
    def of(cls, rows, m: int) -> "ResidueMatrix":
        (a, b), (c, d) = rows
        return cls(m, a, b, c, d)

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.m

    @property
    def tr(self) -> int:
        return (self.a + self.d) % self.m

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def key(self) -> int:
        return pack(self.a, self.b, self.c, self.d, self.m)

    def __matmul__(self, other: "ResidueMatrix") -> "ResidueMatrix":
        return mat_mul(self, other)

    def __str__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]] mod {self.m}"


def identity(m: int) -> ResidueMatrix:
    return ResidueMatrix(m, 1, 0, 0, 1)


def mat_mul(x: ResidueMatrix, y: ResidueMatrix) -> ResidueMatrix:
    if x.m != y.m:
        raise ModulusMismatch(f"{x.m} != {y.m}")
    return ResidueMatrix(
        x.m,
        x.a * y.a + x.b * y.c,
        x.a * y.b + x.b * y.d,
        x.c * y.a + x.d * y.c,
        x.c * y.b + x.d * y.d,
    )


def mat_inv(x: ResidueMatrix) -> ResidueMatrix:
    det = x.det
    if gcd(det, x.m) != 1:
        raise NonUnitDeterminant(f"det {det} not a unit mod {x.m}")
    e = pow(det, -1, x.m) if x.m > 1 else 0
    return ResidueMatrix(x.m, x.d * e, -x.b * e, -x.c * e, x.a * e)


def reduce(x: ResidueMatrix, d: int) -> ResidueMatrix:
    if d <= 0 or x.m % d:
        raise NotDivisor(f"{d} does not divide {x.m}")
    return ResidueMatrix(d, x.a, x.b, x.c, x.d)


def crt_split(x: ResidueMatrix, m1: int, m2: int) -> tuple[ResidueMatrix, ResidueMatrix]:
    if m1 * m2 != x.m or gcd(m1, m2) != 1:
        raise BadFactorization(f"{x.m} != {m1}*{m2} with coprime factors")
    return reduce(x, m1), reduce(x, m2)


def crt(r1: int, m1: int, r2: int, m2: int) -> int:
    """The residue mod m1*m2 congruent to r1 mod m1 and r2 mod m2."""
    if gcd(m1, m2) != 1:
        raise BadFactorization(f"{m1} and {m2} are not coprime")
    if m1 == 1:
        return r2 % m2
    if m2 == 1:
        return r1 % m1
    return (r1 + m1 * ((r2 - r1) * pow(m1, -1, m2))) % (m1 * m2)


def crt_join(x1: ResidueMatrix, x2: ResidueMatrix) -> ResidueMatrix:
    m1, m2 = x1.m, x2.m
    return ResidueMatrix(
        m1 * m2,
        crt(x1.a, m1, x2.a, m2),
        crt(x1.b, m1, x2.b, m2),
        crt(x1.c, m1, x2.c, m2),
        crt(x1.d, m1, x2.d, m2),
    )


# packed codes ---------------------------------------------------------------

def pack(a: int, b: int, c: int, d: int, m: int) -> int:
    return ((a * m + b) * m + c) * m + d


def unpack(code: int, m: int) -> tuple[int, int, int, int]:
    code, d = divmod(code, m)
    code, c = divmod(code, m)
    a, b = divmod(code, m)
    return a, b, c, d


def from_code(code: int, m: int) -> ResidueMatrix:
    return ResidueMatrix(m, *unpack(code, m))


def code_mul(x: int, y: int, m: int) -> int:
    x, xd = divmod(x, m)
    x, xc = divmod(x, m)
    xa, xb = divmod(x, m)
    y, yd = divmod(y, m)
    y, yc = divmod(y, m)
    ya, yb = divmod(y, m)
    return (
        (((xa * ya + xb * yc) % m * m + (xa * yb + xb * yd) % m) * m
         + (xc * ya + xd * yc) % m) * m
        + (xc * yb + xd * yd) % m
    )


def code_inv(x: int, m: int) -> int:
    a, b, c, d = unpack(x, m)
    e = pow((a * d - b * c) % m, -1, m) if m > 1 else 0
    return pack(d * e % m, -b * e % m, -c * e % m, a * e % m, m)


def code_det(x: int, m: int) -> int:
    a, b, c, d = unpack(x, m)
    return (a * d - b * c) % m


def code_tr(x: int, m: int) -> int:
    a, _, _, d = unpack(x, m)
    return (a + d) % m


def code_reduce(x: int, m: int, d: int) -> int:
    a, b, c, e = unpack(x, m)
    return pack(a % d, b % d, c % d, e % d, d)


# small integer helpers --------------------------------------------------------

@lru_cache(maxsize=None)
def factor(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of a positive integer by trial division."""
    if n < 1:
        raise ValueError("factor expects a positive integer")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def prime_divisors(n: int) -> list[int]:
    return [p for p, _ in factor(n)]


def prime_power_parts(n: int) -> list[int]:
    return [p**e for p, e in factor(n)]


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factor(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def is_prime(n: int) -> bool:
    return n >= 2 and factor(n) == ((n, 1),)


def is_prime_power(n: int) -> bool:
    return n > 1 and len(factor(n)) == 1


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


def units(m: int) -> list[int]:
    if m == 1:
        return [0]
    return [u for u in range(m) if gcd(u, m) == 1]


def euler_phi(m: int) -> int:
    out = m
    for p, _ in factor(m):
        out = out // p * (p - 1)
    return out


def gl2_order(m: int) -> int:
    out = 1
    for p, e in factor(m):
        out *= p ** (4 * (e - 1)) * (p * p - 1) * (p * p - p)
    return out


def sl2_order(m: int) -> int:
    return gl2_order(m) // euler_phi(m)


def squarefree_kernel(n: int) -> int:
    out = 1
    for p in prime_divisors(n):
        out *= p
    return out


def parse_matrix(text: str, m: int) -> ResidueMatrix:
    """Read the literal ``[[a,b],[c,d]]``."""
    rows = json.loads(text)
    if not (isinstance(rows, list) and len(rows) == 2 and all(len(r) == 2 for r in rows)):
        raise ValueError(f"not a 2x2 matrix literal: {text!r}")
    return ResidueMatrix.of(rows, m)
