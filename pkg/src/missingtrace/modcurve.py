"""Genus of X_G (via the coset action of SL2) and the prime-power rational-point test."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import grouplat as gl
from . import modarith as ma
from .grouplat import SubgroupSpec


class NotPrimePowerLevel(ValueError):
    pass


@dataclass(frozen=True)
class GenusReport:
    mu: int
    nu2: int
    nu3: int
    nu_inf: int
    genus: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cusps"] = d.pop("nu_inf")
        return d


# standard lifts: order 2 and order 3 elliptic elements, and the cusp generator
ELL2 = ((0, -1), (1, 0))
ELL3 = ((0, -1), (1, 1))
CUSP = ((1, 1), (0, 1))


def _code(rows, m: int) -> int:
    return ma.ResidueMatrix.of(rows, m).key()


def coset_action(G: SubgroupSpec) -> dict[str, list[int]]:
    """Right action of the three standard elements on cosets of <G,-I> n SL2 in SL2(Z/m)."""
    m = G.m
    H = gl.sl2_part(gl.adjoin_minus_identity(G)).elements
    moves = {name: _code(rows, m) for name, rows in (("S", ELL2), ("ST", ELL3), ("T", CUSP))}
    # S and T generate SL2(Z/m); ST is recorded for the order-3 count
    gens = (moves["S"], moves["T"])

    def key(x: int) -> int:
        return int(gl.mul_right(H, x, m).min())

    one = gl.identity_code(m)
    reps = [one]
    index = {key(one): 0}
    perms: dict[str, list[int]] = {"S": [], "T": []}
    i = 0
    while i < len(reps):
        x = reps[i]
        for name, g in zip(("S", "T"), gens):
            y = ma.code_mul(x, g, m)
            k = key(y)
            if k not in index:
                index[k] = len(reps)
                reps.append(y)
            perms[name].append(index[k])
        i += 1
    perms["ST"] = [perms["T"][perms["S"][j]] for j in range(len(reps))]
    return perms


def _orbits(perm: list[int]) -> int:
    seen = [False] * len(perm)
    count = 0
    for start in range(len(perm)):
        if not seen[start]:
            count += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return count


def genus(G: SubgroupSpec) -> GenusReport:
    perms = coset_action(G)
    mu = len(perms["S"])
    nu2 = sum(1 for i, j in enumerate(perms["S"]) if i == j)
    nu3 = sum(1 for i, j in enumerate(perms["ST"]) if i == j)
    cusps = _orbits(perms["T"])
    g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    if g.denominator != 1 or g < 0:
        raise ArithmeticError(f"non-integral genus {g} for {G!r}")
    return GenusReport(mu, nu2, nu3, cusps, int(g))


def genus_of(G: SubgroupSpec) -> int:
    cached = getattr(G, "_genus", None)
    if cached is None:
        cached = genus(G)
        G._genus = cached
    return cached.genus


# rational points at prime-power level ----------------------------------------------

TEST_MATRICES = (((1, 0), (0, -1)), ((1, 1), (0, -1)))


def sz_rational_point_test(G: SubgroupSpec) -> bool:
    """True iff <G,-I> meets the GL2-conjugacy class of diag(1,-1) or [[1,1],[0,-1]]."""
    Gt = gl.adjoin_minus_identity(G)
    q = Gt.m
    if q > 1 and not ma.is_prime_power(q):
        level = Gt.gl2_level
        if level != 1 and not ma.is_prime_power(level):
            raise NotPrimePowerLevel(f"level {level} is not a prime power")
        Gt = Gt.image(level)
        q = level
    if q == 1:
        return True
    amb = gl.ambient(q)
    for rows in TEST_MATRICES:
        cls = np.unique(amb.conj_images(_code(rows, q)))
        if np.isin(cls, Gt.elements, assume_unique=True).any():
            return True
    return False
