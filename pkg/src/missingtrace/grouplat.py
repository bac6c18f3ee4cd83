"""Subgroups of GL2(Z/mZ): closure, structural operations, levels, conjugacy."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import gcd

import numpy as np

from . import modarith as ma
from .modarith import ResidueMatrix

DEFAULT_CAP = 20_000_000
# m**4 must fit comfortably in int64 for the vectorised code paths
MAX_GROUP_MODULUS = 50_000


class ClosureCapExceeded(RuntimeError):
    pass


# vectorised matrix arithmetic on packed codes ---------------------------------

def unpack_arr(codes: np.ndarray, m: int):
    codes = np.asarray(codes, dtype=np.int64)
    d = codes % m
    rest = codes // m
    c = rest % m
    rest //= m
    return rest // m, rest % m, c, d


def pack_arr(a, b, c, d, m: int) -> np.ndarray:
    return ((a % m * m + b % m) * m + c % m) * m + d % m


def mul_right(codes: np.ndarray, y: int, m: int) -> np.ndarray:
    """codes[i] * y for every i."""
    a, b, c, d = unpack_arr(codes, m)
    ya, yb, yc, yd = ma.unpack(y, m)
    return pack_arr(a * ya + b * yc, a * yb + b * yd, c * ya + d * yc, c * yb + d * yd, m)


def mul_left(x: int, codes: np.ndarray, m: int) -> np.ndarray:
    """x * codes[i] for every i."""
    xa, xb, xc, xd = ma.unpack(x, m)
    a, b, c, d = unpack_arr(codes, m)
    return pack_arr(xa * a + xb * c, xa * b + xb * d, xc * a + xd * c, xc * b + xd * d, m)


def det_arr(codes: np.ndarray, m: int) -> np.ndarray:
    a, b, c, d = unpack_arr(codes, m)
    return (a * d - b * c) % m


def tr_arr(codes: np.ndarray, m: int) -> np.ndarray:
    a, _, _, d = unpack_arr(codes, m)
    return (a + d) % m


def reduce_arr(codes: np.ndarray, m: int, d: int) -> np.ndarray:
    a, b, c, e = unpack_arr(codes, m)
    return pack_arr(a, b, c, e, d)


def _check_modulus(m: int) -> None:
    if m > MAX_GROUP_MODULUS:
        raise ValueError(f"group computations support moduli up to {MAX_GROUP_MODULUS}")


def minus_identity(m: int) -> int:
    return ma.pack(m - 1, 0, 0, m - 1, m) if m > 1 else 0


def identity_code(m: int) -> int:
    return ma.pack(1 % m, 0, 0, 1 % m, m)


def _close_codes(gens: list[int], m: int, cap: int, seed: np.ndarray | None = None) -> np.ndarray:
    elems = np.array([identity_code(m)], dtype=np.int64) if seed is None else np.unique(seed)
    frontier = elems
    gens = sorted(set(gens))
    while frontier.size:
        prods = np.unique(np.concatenate([mul_right(frontier, g, m) for g in gens])) if gens else frontier[:0]
        fresh = prods[~np.isin(prods, elems, assume_unique=True)]
        if fresh.size:
            elems = np.union1d(elems, fresh)
            if elems.size > cap:
                raise ClosureCapExceeded(f"closure exceeded cap {cap} at modulus {m}")
        frontier = fresh
    return elems


# ambient GL2(Z/qZ) --------------------------------------------------------------

class Ambient:
    """All of GL2(Z/qZ) as entry arrays, plus inverses, for vectorised searches."""

    def __init__(self, q: int):
        _check_modulus(q)
        self.q = q
        allc = np.arange(q**4, dtype=np.int64)
        dets = det_arr(allc, q)
        good = np.gcd(dets, q) == 1 if q > 1 else np.ones(1, bool)
        self.codes = allc[good]
        self.a, self.b, self.c, self.d = unpack_arr(self.codes, q)
        dinv = np.array([pow(x, -1, q) if q > 1 and gcd(x, q) == 1 else 0 for x in range(q)], dtype=np.int64)
        e = dinv[dets[good]]
        self.ia, self.ib, self.ic, self.id = self.d * e % q, -self.b * e % q, -self.c * e % q, self.a * e % q
        self.order = self.codes.size

    def conj_images(self, x: int, idx=None) -> np.ndarray:
        """Codes of g x g^-1 for every g (or for the g selected by ``idx``)."""
        q = self.q
        a, b, c, d = ma.unpack(x, q)
        ga, gb, gc, gd = self.a, self.b, self.c, self.d
        ha, hb, hc, hd = self.ia, self.ib, self.ic, self.id
        if idx is not None:
            ga, gb, gc, gd, ha, hb, hc, hd = (v[idx] for v in (ga, gb, gc, gd, ha, hb, hc, hd))
        pa, pb = (ga * a + gb * c) % q, (ga * b + gb * d) % q
        pc, pd = (gc * a + gd * c) % q, (gc * b + gd * d) % q
        return pack_arr(pa * ha + pb * hc, pa * hb + pb * hd, pc * ha + pd * hc, pc * hb + pd * hd, q)

    def mask(self, codes) -> np.ndarray:
        out = np.zeros(self.q**4, dtype=bool)
        out[np.asarray(codes, dtype=np.int64)] = True
        return out


@lru_cache(maxsize=32)
def ambient(q: int) -> Ambient:
    return Ambient(q)


# subgroup value type -------------------------------------------------------------

class SubgroupSpec:
    """A subgroup of GL2(Z/mZ), given by generators; elements closed lazily."""

    def __init__(self, m: int, gens=(), *, elements: np.ndarray | None = None,
                 label: str | None = None, cap: int = DEFAULT_CAP):
        _check_modulus(m)
        self.m = m
        self.gens = tuple(sorted({int(g) for g in gens}))
        self.label = label
        self.cap = cap
        self._elements = None if elements is None else np.unique(np.asarray(elements, dtype=np.int64))

    # construction helpers
    @classmethod
    def from_matrices(cls, mats, m: int, **kw) -> "SubgroupSpec":
        codes = []
        for x in mats:
            if not isinstance(x, ResidueMatrix):
                x = ResidueMatrix.of(x, m)
            if x.m != m:
                raise ma.ModulusMismatch(f"{x.m} != {m}")
            if gcd(x.det, m) != 1:
                raise ma.NonUnitDeterminant(str(x))
            codes.append(x.key())
        return cls(m, codes, **kw)

    @property
    def elements(self) -> np.ndarray:
        if self._elements is None:
            self._elements = _close_codes(list(self.gens), self.m, self.cap)
        return self._elements

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(int(x) for x in self.elements)

    @property
    def order(self) -> int:
        return int(self.elements.size)

    def __len__(self) -> int:
        return self.order

    def __contains__(self, x) -> bool:
        if isinstance(x, ResidueMatrix):
            x = x.key()
        return int(x) in self.element_set

    def contains_all(self, codes) -> bool:
        codes = np.asarray(codes, dtype=np.int64)
        return bool(np.isin(codes, self.elements, assume_unique=False).all())

    def matrices(self):
        return [ma.from_code(int(x), self.m) for x in self.elements]

    def generator_matrices(self) -> list[ResidueMatrix]:
        return [ma.from_code(g, self.m) for g in self.small_generators]

    @cached_property
    def small_generators(self) -> tuple[int, ...]:
        """A short generating list (the stored one when present)."""
        if self.gens or self.order == 1:
            return self.gens
        return tuple(greedy_generators(self.elements, self.m))

    @cached_property
    def contains_minus_I(self) -> bool:
        return minus_identity(self.m) in self

    @cached_property
    def det_image(self) -> frozenset:
        return frozenset(int(x) for x in np.unique(det_arr(self.elements, self.m)))

    def trace_set(self, d: int | None = None) -> frozenset:
        d = self.m if d is None else d
        return frozenset(int(x) for x in np.unique(tr_arr(self.elements, self.m) % d))

    def image(self, d: int) -> "SubgroupSpec":
        if self.m % d:
            raise ma.NotDivisor(f"{d} does not divide {self.m}")
        if d == self.m:
            return self
        gens = [ma.code_reduce(g, self.m, d) for g in self.gens]
        return SubgroupSpec(d, gens, elements=reduce_arr(self.elements, self.m, d), cap=self.cap)

    @cached_property
    def gl2_level(self) -> int:
        m, n = self.m, self.order
        for d in ma.divisors(m):
            if self.image(d).order * (ma.gl2_order(m) // ma.gl2_order(d)) == n:
                return d
        return m

    @cached_property
    def sl2_level(self) -> int:
        s = sl2_part(self)
        m, n = self.m, s.order
        for d in ma.divisors(m):
            if s.image(d).order * (ma.sl2_order(m) // ma.sl2_order(d)) == n:
                return d
        return m

    @cached_property
    def fingerprint(self) -> tuple:
        """Conjugation invariants: order, -I flag, histogram of (det, tr, scalar level)."""
        a, b, c, d = unpack_arr(self.elements, self.m)
        det = (a * d - b * c) % self.m
        tr = (a + d) % self.m
        lev = np.gcd(np.gcd(np.gcd(b, c), (a - d) % self.m), self.m)
        hist = Counter(zip(det.tolist(), tr.tolist(), lev.tolist()))
        return (self.order, self.contains_minus_I, tuple(sorted(hist.items())))

    def to_record(self) -> dict:
        rec = {"m": self.m, "gens": [g.rows() for g in self.generator_matrices()]}
        if self.label:
            rec["label"] = self.label
        return rec

    @classmethod
    def from_record(cls, rec: dict, **kw) -> "SubgroupSpec":
        return cls.from_matrices(rec["gens"], int(rec["m"]), label=rec.get("label"), **kw)

    def __repr__(self) -> str:
        tag = f" {self.label}" if self.label else ""
        return f"<SubgroupSpec{tag} mod {self.m}, order {self.order}>"


def greedy_generators(elements: np.ndarray, m: int, seed: int = 0) -> list[int]:
    """Random elements outside the running closure until it fills the group."""
    rng = np.random.default_rng(seed)
    target = elements.size
    gens: list[int] = []
    have = np.array([identity_code(m)], dtype=np.int64)
    while have.size < target:
        outside = elements[~np.isin(elements, have, assume_unique=True)]
        gens.append(int(outside[rng.integers(outside.size)]))
        have = _close_codes(gens, m, DEFAULT_CAP)
    # drop redundant generators, last first
    for g in list(reversed(gens)):
        rest = [h for h in gens if h != g]
        if _close_codes(rest, m, DEFAULT_CAP).size == target:
            gens = rest
    return gens


# operations -----------------------------------------------------------------------

def close(gens, m: int, cap: int = DEFAULT_CAP, label: str | None = None) -> SubgroupSpec:
    g = SubgroupSpec.from_matrices(gens, m, cap=cap, label=label)
    g.elements  # raise cap errors here rather than later
    return g


def full_group(m: int) -> SubgroupSpec:
    return SubgroupSpec(m, kernel_generators(m, 1), elements=ambient(m).codes)


def sl2_group(m: int) -> SubgroupSpec:
    return sl2_part(full_group(m))


def adjoin_minus_identity(G: SubgroupSpec) -> SubgroupSpec:
    if G.contains_minus_I:
        return G
    mi = minus_identity(G.m)
    elems = np.union1d(G.elements, mul_left(mi, G.elements, G.m))
    return SubgroupSpec(G.m, G.small_generators + (mi,), elements=elems, cap=G.cap)


def sl2_part(G: SubgroupSpec) -> SubgroupSpec:
    e = G.elements
    return SubgroupSpec(G.m, elements=e[det_arr(e, G.m) == 1 % G.m], cap=G.cap)


def det_image(G: SubgroupSpec) -> frozenset:
    return G.det_image


def has_full_det(G: SubgroupSpec) -> bool:
    return len(G.det_image) == ma.euler_phi(G.m)


def commutator_subgroup(G: SubgroupSpec) -> SubgroupSpec:
    m = G.m
    gens = G.small_generators
    inv = {g: ma.code_inv(g, m) for g in gens}
    comms = {
        ma.code_mul(ma.code_mul(x, y, m), ma.code_mul(inv[x], inv[y], m), m)
        for x in gens for y in gens
    }
    comms.discard(identity_code(m))
    H = SubgroupSpec(m, comms, cap=G.cap)
    # normal closure: conjugate generators of H by generators of G until stable
    while True:
        new = set()
        for h in H.small_generators:
            for g in gens:
                y = ma.code_mul(ma.code_mul(g, h, m), inv[g], m)
                if y not in H:
                    new.add(y)
        if not new:
            return H
        H = SubgroupSpec(m, set(H.small_generators) | new, cap=G.cap)


def preimage(G: SubgroupSpec, m: int) -> SubgroupSpec:
    d = G.m
    if m % d:
        raise ma.NotDivisor(f"{d} does not divide {m}")
    if m == d:
        return G
    size = G.order * ma.gl2_order(m) // ma.gl2_order(d)
    if size > G.cap:
        raise ClosureCapExceeded(f"preimage of order {size} exceeds cap {G.cap}")
    k = m // d
    lifts_a, lifts_b, lifts_c, lifts_d = (np.arange(k, dtype=np.int64) * d,) * 4
    ga, gb, gc, gd = unpack_arr(G.elements, d)
    # lift every entry independently, then keep unit determinants
    grid = np.stack(np.meshgrid(lifts_a, lifts_b, lifts_c, lifts_d, indexing="ij"), -1).reshape(-1, 4)
    A = (ga[:, None] + grid[None, :, 0]).ravel()
    B = (gb[:, None] + grid[None, :, 1]).ravel()
    C = (gc[:, None] + grid[None, :, 2]).ravel()
    D = (gd[:, None] + grid[None, :, 3]).ravel()
    codes = pack_arr(A, B, C, D, m)
    codes = codes[np.gcd(det_arr(codes, m), m) == 1]
    gens = [ma.pack(*ma.unpack(g, d), m) for g in G.small_generators]
    return SubgroupSpec(m, gens + kernel_generators(m, d), elements=codes, cap=G.cap)


def kernel_generators(m: int, d: int) -> list[int]:
    """Elementary matrices generating ker(GL2(Z/m) -> GL2(Z/d)) together with scalars."""
    if m == d:
        return []
    out = [ma.pack(1, d, 0, 1, m), ma.pack(1, 0, d, 1, m)]
    for u in ma.units(m):
        if u % d == 1 % d and u != 1 % m:
            out.append(ma.pack(u, 0, 0, 1, m))
            out.append(ma.pack(1, 0, 0, u, m))
    return sorted(set(out))


def gl2_level(G: SubgroupSpec) -> int:
    return G.gl2_level


def sl2_level(G: SubgroupSpec) -> int:
    return G.sl2_level


def conjugate(G: SubgroupSpec, g) -> SubgroupSpec:
    if isinstance(g, ResidueMatrix):
        g = g.key()
    m = G.m
    gi = ma.code_inv(g, m)
    elems = mul_right(mul_left(g, G.elements, m), gi, m)
    gens = [ma.code_mul(ma.code_mul(g, x, m), gi, m) for x in G.small_generators]
    return SubgroupSpec(m, gens, elements=elems, cap=G.cap)


# conjugacy ------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    holds: bool
    conjugator: ResidueMatrix | None = None

    def __bool__(self) -> bool:
        return self.holds


def conjugacy(G1: SubgroupSpec, G2: SubgroupSpec, mode: str = "equal") -> Verdict:
    """Decide G1 = g G2 g^-1 (mode 'equal') or g G1 g^-1 <= G2 (mode 'contained').

    For 'equal' the witness g satisfies g G1 g^-1 = G2.
    """
    if G1.m != G2.m:
        raise ma.ModulusMismatch(f"{G1.m} != {G2.m}")
    if mode not in ("equal", "contained"):
        raise ValueError(f"unknown mode {mode!r}")
    m = G1.m
    if mode == "equal":
        if G1.fingerprint != G2.fingerprint:
            return Verdict(False)
    else:
        if G2.order % G1.order or (G1.contains_minus_I and not G2.contains_minus_I):
            return Verdict(False)
        if not G1.det_image <= G2.det_image:
            return Verdict(False)
    if m == 1:
        return Verdict(True, ma.identity(1))
    parts = ma.prime_power_parts(m)
    gens = G1.small_generators
    if not gens:
        return Verdict(True, ma.identity(m))

    # per component: candidate conjugators mapping generators of G1 into G2
    comp = []
    for q in parts:
        amb = ambient(q)
        target = amb.mask(np.unique(reduce_arr(G2.elements, m, q)))
        ok = np.ones(amb.order, dtype=bool)
        for x in gens:
            ok &= target[amb.conj_images(ma.code_reduce(x, m, q))]
        idx = np.flatnonzero(ok)
        if idx.size == 0:
            return Verdict(False)
        comp.append((q, amb, idx))

    gen_parts = [[ma.code_reduce(x, m, q) for q, _, _ in comp] for x in gens]
    # fibre of G2 over all but the last component
    *head, (ql, ambl, idxl) = comp
    mh = m // ql
    fibres: dict[int, list[int]] = {}
    for y, yl in zip(reduce_arr(G2.elements, m, mh).tolist(), reduce_arr(G2.elements, m, ql).tolist()):
        fibres.setdefault(y, []).append(yl)
    last_imgs = [ambl.conj_images(gp[-1], idxl) for gp in gen_parts]

    # enumerate head conjugators, deduplicated by their action on generators
    head_choices = []
    for j, (q, amb, idx) in enumerate(head):
        seen = {}
        imgs = np.stack([amb.conj_images(gp[j], idx) for gp in gen_parts], axis=1)
        for pos, row in enumerate(map(tuple, imgs.tolist())):
            seen.setdefault(row, int(idx[pos]))
        head_choices.append([(row, g) for row, g in seen.items()])

    for combo in itertools.product(*head_choices) if head_choices else [()]:
        ok = np.ones(idxl.size, dtype=bool)
        for gi, gp in enumerate(gen_parts):
            hx = _crt_codes([row[gi] for row, _ in combo], [q for q, _, _ in head])
            fib = fibres.get(hx)
            if fib is None:
                ok[:] = False
                break
            ok &= ambl.mask(fib)[last_imgs[gi]]
            if not ok.any():
                break
        if ok.any():
            pick = int(idxl[np.flatnonzero(ok)[0]])
            pieces = [ma.from_code(int(amb.codes[g]), q) for (q, amb, _), (_, g) in zip(head, combo)]
            pieces.append(ma.from_code(int(ambl.codes[pick]), ql))
            w = pieces[0]
            for p in pieces[1:]:
                w = ma.crt_join(w, p)
            return Verdict(True, w)
    return Verdict(False)


def _crt_codes(codes: list[int], mods: list[int]) -> int:
    if not codes:
        return 0
    mats = [ma.from_code(c, q) for c, q in zip(codes, mods)]
    w = mats[0]
    for x in mats[1:]:
        w = ma.crt_join(w, x)
    return w.key()


def is_conjugate(G1: SubgroupSpec, G2: SubgroupSpec) -> bool:
    return conjugacy(G1, G2, "equal").holds


def is_subconjugate(G1: SubgroupSpec, G2: SubgroupSpec) -> bool:
    return conjugacy(G1, G2, "contained").holds
