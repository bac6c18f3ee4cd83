"""Exact rational functions in (t, D) and a few cubic-field helpers.

Polynomial arithmetic is delegated to sympy; this module owns the canonical
form, the expression grammar (parser and printer) and composition.

Grammar::

    expr   := ['-'] term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' uint)?
    base   := int | 't' | 'D' | '(' expr ')'
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable

import numpy as np
import sympy
from sympy import Poly, ZZ

from . import modarith as ma

T, DV = sympy.symbols("t D")
GENS = (T, DV)
_X = sympy.Symbol("x")


class ExprSyntaxError(SyntaxError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos} in {text!r}")
        self.pos = pos
        self.text = text


class DivisionByZeroPolynomial(ZeroDivisionError):
    pass


class PoleError(ZeroDivisionError):
    pass


class NonSquareDiscriminant(ValueError):
    pass


class ReducibleCubic(ValueError):
    pass


def _poly(expr) -> Poly:
    return Poly(expr, *GENS, domain=ZZ)


_ZERO = _poly(0)
_ONE = _poly(1)


class RatExpr:
    """num/den with integer coefficients, gcd 1 and a positive leading denominator coefficient."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = _ONE):
        if den.is_zero:
            raise DivisionByZeroPolynomial("denominator is the zero polynomial")
        if num.is_zero:
            den = _ONE
        else:
            g = num.gcd(den)
            if not g.is_one:
                num, den = num.exquo(g), den.exquo(g)
        if den.LC() < 0:
            num, den = -num, -den
        self.num = num
        self.den = den

    # construction
    @classmethod
    def const(cls, c) -> "RatExpr":
        c = Fraction(c)
        return cls(_poly(c.numerator), _poly(c.denominator))

    @classmethod
    def var(cls, name: str = "t") -> "RatExpr":
        return cls(_poly({"t": T, "D": DV}[name]))

    @classmethod
    def coerce(cls, x) -> "RatExpr":
        if isinstance(x, RatExpr):
            return x
        if isinstance(x, str):
            return parse_expr(x)
        return cls.const(x)

    # arithmetic
    def __add__(self, other):
        o = RatExpr.coerce(other)
        return RatExpr(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RatExpr.coerce(other))

    def __rsub__(self, other):
        return RatExpr.coerce(other) - self

    def __mul__(self, other):
        o = RatExpr.coerce(other)
        return RatExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RatExpr.coerce(other)
        if o.num.is_zero:
            raise DivisionByZeroPolynomial("division by the zero rational function")
        return RatExpr(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RatExpr.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RatExpr(_ONE, _ONE) / (self ** -k)
        return RatExpr(self.num**k, self.den**k)

    def __eq__(self, other):
        if not isinstance(other, RatExpr):
            try:
                other = RatExpr.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((str(self.num.as_expr()), str(self.den.as_expr())))

    # inspection
    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def uses_D(self) -> bool:
        return self.num.degree(DV) > 0 or self.den.degree(DV) > 0

    def degree(self) -> int:
        """Degree in t as a map P^1 -> P^1 (for t-only expressions)."""
        return max(self.num.degree(T), self.den.degree(T), 0)

    def __repr__(self):
        return f"RatExpr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)


# evaluation -----------------------------------------------------------------------

def _eval_poly(p: Poly, t0: Fraction, d0: Fraction) -> Fraction:
    total = Fraction(0)
    for (i, j), c in p.terms():
        total += int(c) * t0**i * d0**j
    return total


def eval_expr(e: RatExpr, t0, D0=0) -> Fraction:
    t0, D0 = Fraction(t0), Fraction(D0)
    den = _eval_poly(e.den, t0, D0)
    if den == 0:
        raise PoleError(f"{to_text(e)} has a pole at t={t0}, D={D0}")
    return _eval_poly(e.num, t0, D0) / den


# composition ----------------------------------------------------------------------

def _homogenize(p: Poly, num: Poly, den: Poly, n: int) -> Poly:
    """den^n * p(num/den) for univariate p of degree <= n."""
    coeffs = {i: int(c) for (i, _), c in p.terms()}
    num_pows = [_ONE]
    den_pows = [_ONE]
    for _ in range(n):
        num_pows.append(num_pows[-1] * num)
        den_pows.append(den_pows[-1] * den)
    out = _ZERO
    for i, c in coeffs.items():
        out += c * num_pows[i] * den_pows[n - i]
    return out


def compose(outer: RatExpr, inner: RatExpr) -> RatExpr:
    """outer(inner(t)); outer must not involve D."""
    outer, inner = RatExpr.coerce(outer), RatExpr.coerce(inner)
    if outer.uses_D():
        raise ValueError("outer function must be univariate in t")
    n = outer.num.degree(T)
    d = max(outer.den.degree(T), 0)
    n = max(n, 0)
    top = _homogenize(outer.num, inner.num, inner.den, n)
    bottom = _homogenize(outer.den, inner.num, inner.den, d)
    if bottom.is_zero:
        raise DivisionByZeroPolynomial("composite denominator vanishes identically")
    # num(p/q) = top/q^n, den(p/q) = bottom/q^d
    if n >= d:
        return RatExpr(top, bottom * inner.den ** (n - d))
    return RatExpr(top * inner.den ** (d - n), bottom)


def compose_chain(*funcs: RatExpr) -> RatExpr:
    """compose_chain(f, g, h) = f(g(h(t)))."""
    out = RatExpr.coerce(funcs[-1])
    for f in reversed(funcs[:-1]):
        out = compose(f, out)
    return out


def identity_check(lhs: RatExpr, rhs: RatExpr) -> bool:
    lhs, rhs = RatExpr.coerce(lhs), RatExpr.coerce(rhs)
    return (lhs.num * rhs.den - rhs.num * lhs.den).is_zero


# parsing --------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([tD])|([-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", text, start)
        kind = "int" if m.group(1) else "var" if m.group(2) else "op"
        out.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][1] if self.i < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)

    def fail(self, msg: str):
        raise ExprSyntaxError(msg, self.text, self.pos())

    def take(self) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val: str):
        if self.peek() != val:
            self.fail(f"expected {val!r}")
        self.take()

    def parse(self) -> RatExpr:
        if not self.toks:
            self.fail("empty expression")
        e = self.expr()
        if self.i != len(self.toks):
            self.fail("unexpected token")
        return e

    def expr(self) -> RatExpr:
        neg = self.peek() == "-"
        if neg:
            self.take()
        acc = self.term()
        if neg:
            acc = -acc
        while self.peek() in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> RatExpr:
        acc = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()[1]
            where = self.pos()
            rhs = self.factor()
            if op == "*":
                acc = acc * rhs
            else:
                if rhs.is_zero:
                    raise DivisionByZeroPolynomial(f"division by zero at position {where} in {self.text!r}")
                acc = acc / rhs
        return acc

    def factor(self) -> RatExpr:
        base = self.base()
        if self.peek() == "^":
            self.take()
            if self.i >= len(self.toks) or self.toks[self.i][0] != "int":
                self.fail("expected unsigned exponent")
            base = base ** int(self.take()[1])
        return base

    def base(self) -> RatExpr:
        if self.i >= len(self.toks):
            self.fail("unexpected end of input")
        kind, val, _ = self.toks[self.i]
        if kind == "int":
            self.take()
            return RatExpr.const(int(val))
        if kind == "var":
            self.take()
            return RatExpr.var(val)
        if val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        self.fail(f"unexpected {val!r}")


def parse_expr(text: str) -> RatExpr:
    return _Parser(text).parse()


# printing -------------------------------------------------------------------------

def _poly_text(p: Poly) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for (i, j), c in p.terms():
        c = int(c)
        mono = [f"t^{i}" if i > 1 else "t"] if i else []
        mono += [f"D^{j}" if j > 1 else "D"] if j else []
        mag = abs(c)
        body = "*".join(([str(mag)] if mag != 1 or not mono else []) + mono)
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("-" if c < 0 else "+") + body)
    return "".join(parts)


def to_text(e: RatExpr) -> str:
    num = _poly_text(e.num)
    if e.den.is_one:
        return num
    return f"({num})/({_poly_text(e.den)})"


# cubic fields ---------------------------------------------------------------------

def squarefree_part(q) -> int:
    q = Fraction(q)
    if q == 0:
        raise ValueError("squarefree part of zero")
    n = abs(q.numerator * q.denominator)
    out = 1
    for p, e in sympy.factorint(n).items():
        if e % 2:
            out *= int(p)
    return out if q > 0 else -out


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    a, b = isqrt(q.numerator), isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def _qpoly_x(coeffs: Iterable) -> Poly:
    return Poly([sympy.Rational(Fraction(c).numerator, Fraction(c).denominator) for c in coeffs], _X, domain="QQ")


def resultant(f: Iterable, g: Iterable) -> Fraction:
    """Resultant of two univariate polynomials given by coefficients, highest degree first."""
    r = sympy.resultant(_qpoly_x(f), _qpoly_x(g))
    r = sympy.Rational(r)
    return Fraction(int(r.p), int(r.q))


@dataclass(frozen=True)
class Cubic:
    """x^3 - S1 x^2 + S2 x - S3."""

    S1: Fraction
    S2: Fraction
    S3: Fraction

    def __post_init__(self):
        for name in ("S1", "S2", "S3"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @classmethod
    def monic(cls, a2, a1, a0) -> "Cubic":
        """From x^3 + a2 x^2 + a1 x + a0."""
        return cls(-Fraction(a2), Fraction(a1), -Fraction(a0))

    def coeffs(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return Fraction(1), -self.S1, self.S2, -self.S3

    def shift(self, c) -> "Cubic":
        """The cubic whose roots are those of self plus c."""
        p = _qpoly_x(self.coeffs()).compose(Poly(_X - sympy.Rational(str(Fraction(c))), _X, domain="QQ"))
        _, a2, a1, a0 = (Fraction(str(v)) for v in p.all_coeffs())
        return Cubic.monic(a2, a1, a0)

    def is_irreducible(self) -> bool:
        return _qpoly_x(self.coeffs()).is_irreducible

    def __str__(self):
        return str(_qpoly_x(self.coeffs()).as_expr()).replace("**", "^")


def cubic_disc(f: Cubic) -> Fraction:
    _, a, b, c = f.coeffs()
    return a * a * b * b - 4 * b**3 - 4 * a**3 * c - 27 * c * c + 18 * a * b * c


def companion_cubics(fS: Cubic, fT: Cubic) -> tuple[Cubic, Cubic]:
    """The two further cyclic cubics in the compositum, with the positive square roots."""
    rS, rT = _rational_sqrt(cubic_disc(fS)), _rational_sqrt(cubic_disc(fT))
    if rS is None or rT is None:
        raise NonSquareDiscriminant("both discriminants must be nonzero rational squares")
    S1, S2, S3 = fS.S1, fS.S2, fS.S3
    T1, T2, T3 = fT.S1, fT.S2, fT.S3
    R1 = S1 * T1
    R2 = S1 * S1 * T2 + T1 * T1 * S2 - 3 * S2 * T2
    base = S1**3 * T3 + T1**3 * S3 - 3 * S1 * S2 * T3 - 3 * T1 * T2 * S3 + 9 * S3 * T3
    P, Q = S1 * S2 - 3 * S3, T1 * T2 - 3 * T3
    # the two quarter-terms of each coefficient pair up to (PQ +- rS rT)/2
    R3 = base + (P * Q + rS * rT) / 2
    R3p = base + (P * Q - rS * rT) / 2
    return Cubic(R1, R2, R3), Cubic(R1, R2, R3p)


class FieldVerdict(str, enum.Enum):
    EQUAL = "equal"
    DISTINCT = "distinct"
    INCONCLUSIVE = "inconclusive"


EQUAL_EVIDENCE = 50


def _root_count_mod_p(f: Cubic, p: int) -> int | None:
    vals = []
    for c in f.coeffs():
        if c.denominator % p == 0:
            return None
        vals.append(c.numerator * pow(c.denominator, -1, p) % p)
    x = np.arange(p, dtype=np.int64)
    y = np.zeros(p, dtype=np.int64)
    for c in vals:
        y = (y * x + c) % p
    return int(np.count_nonzero(y == 0))


def _check_cyclic(f: Cubic) -> Fraction:
    if not f.is_irreducible():
        raise ReducibleCubic(f"{f} is reducible over Q")
    disc = cubic_disc(f)
    if _rational_sqrt(disc) is None:
        raise NonSquareDiscriminant(f"{f} has non-square discriminant {disc}")
    return disc


def same_splitting_field(fS: Cubic, fT: Cubic, prime_budget: int = 2000) -> FieldVerdict:
    """Compare split/inert behaviour at good primes up to the budget."""
    dS, dT = _check_cyclic(fS), _check_cyclic(fT)
    bad = dS.numerator * dS.denominator * dT.numerator * dT.denominator
    agree = 0
    for p in ma.primes_upto(prime_budget):
        if bad % p == 0:
            continue
        nS, nT = _root_count_mod_p(fS, p), _root_count_mod_p(fT, p)
        if nS is None or nT is None:
            continue
        if (nS == 3) != (nT == 3):
            return FieldVerdict.DISTINCT
        agree += 1
    return FieldVerdict.EQUAL if agree >= EQUAL_EVIDENCE else FieldVerdict.INCONCLUSIVE
