"""Missing-trace predicates, Goursat assembly and the genus-zero classification."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from . import grouplat as gl
from . import modarith as ma
from . import modcurve as mc
from . import sublattice as sl
from .grouplat import SubgroupSpec
from .sublattice import UnsupportedLevel

log = logging.getLogger(__name__)

# SL2-levels of genus zero congruence subgroups (taken as data)
CP0_LEVELS = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 18, 20, 21, 24, 25, 26,
              27, 28, 30, 32, 36, 48)
# SL2-levels that survive the lifting analysis for genus zero missing trace groups
EXTENDED_LEVELS = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 18, 20, 21, 22, 24,
                   25, 26, 27, 28, 30, 32, 36, 40, 42, 48, 50, 52, 54, 56, 60, 64, 72, 96)
DEEP_LEVELS = (48, 96)


# traces ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceFiber:
    m: int
    r: int
    count: int


def trace_set(G: SubgroupSpec, d: int | None = None) -> frozenset:
    return G.trace_set(d)


def trace_fibers(G: SubgroupSpec, d: int | None = None) -> list[TraceFiber]:
    d = G.m if d is None else d
    counts = np.bincount(gl.tr_arr(G.elements, G.m) % d, minlength=d)
    return [TraceFiber(d, r, int(n)) for r, n in enumerate(counts)]


def missing_residues(G: SubgroupSpec, d: int | None = None) -> list[int]:
    d = G.m if d is None else d
    return sorted(set(range(d)) - G.trace_set(d))


def has_full_trace(G: SubgroupSpec, d: int | None = None) -> bool:
    d = G.m if d is None else d
    return len(G.trace_set(d)) == d


def is_new_missing_trace(G: SubgroupSpec) -> bool:
    """Traces miss a class mod m but are onto mod m/p for each prime p | m."""
    m = G.m
    if m == 1 or has_full_trace(G):
        return False
    return all(has_full_trace(G, m // p) for p in ma.prime_divisors(m))


# d_G and admissibility -----------------------------------------------------------------

def d_of_group(G: SubgroupSpec) -> int:
    ms = G.sl2_level
    if ms == 1:
        return 1
    Gs = G.image(ms)
    index = gl.sl2_part(Gs).order // gl.commutator_subgroup(Gs).order
    out = 1
    for p in ma.prime_divisors(ms):
        while index % p == 0:
            index //= p
            out *= p
    return out


def is_d_admissible(G: SubgroupSpec, d: int) -> bool:
    if d == 1:
        return True
    if any(e > 1 for _, e in ma.factor(d)):
        raise ValueError(f"{d} is not squarefree")
    m = G.m
    if any(m % p for p in ma.prime_divisors(d)):
        # scalar-mod-p is only visible from entries mod m when p | m
        raise ValueError(f"{d} is not supported on primes dividing the modulus {m}")
    level = G.gl2_level
    e = G.elements
    a, b, c, dd = gl.unpack_arr(e, m)
    scalar = np.ones(e.size, dtype=bool)
    for p in ma.prime_divisors(d):
        scalar &= (b % p == 0) & (c % p == 0) & ((a - dd) % p == 0)
    tr = (a + dd) % level
    for t in range(level):
        fibre = tr == t
        if scalar[fibre].all():
            return True
    return False


def det_character_lifts(G: SubgroupSpec, d: int) -> list[SubgroupSpec]:
    """Groups {g mod dm : g mod m in G, det g = delta(g mod m)} for homomorphisms delta
    from G to (Z/dmZ)^x lifting the determinant.  These are the lifts whose SL2 part
    is the full preimage of G's."""
    m = G.m
    M = d * m
    gens = list(G.small_generators)
    lifted_units = [u for u in ma.units(M)]
    choices = [[u for u in lifted_units if u % m == ma.code_det(g, m)] for g in gens]
    out = []
    pre = gl.preimage(G, M)
    det_pre = gl.det_arr(pre.elements, M)
    red = gl.reduce_arr(pre.elements, M, m)
    pos = np.searchsorted(G.elements, red)
    for combo in itertools.product(*choices):
        delta = _extend_character(G, gens, combo, M)
        if delta is None:
            continue
        keep = det_pre == delta[pos]
        lifted = SubgroupSpec(M, elements=pre.elements[keep])
        if not any(gl.is_conjugate(lifted, h) for h in out):
            out.append(lifted)
    return out


def _extend_character(G, gens, values, M):
    """Extend gens -> values to a hom G -> (Z/M)^x, or None if inconsistent."""
    m = G.m
    idx = {int(x): i for i, x in enumerate(G.elements)}
    val = np.zeros(G.order, dtype=np.int64)
    one = gl.identity_code(m)
    val[idx[one]] = 1 % M
    seen = {one}
    todo = [one]
    while todo:
        x = todo.pop()
        for g, v in zip(gens, values):
            y = ma.code_mul(x, g, m)
            w = val[idx[x]] * v % M
            if y in seen:
                if val[idx[y]] != w:
                    return None
            else:
                seen.add(y)
                val[idx[y]] = w
                todo.append(y)
    return val


# normal subgroups and quotients ---------------------------------------------------------

def _index_of(G: SubgroupSpec, codes: np.ndarray) -> np.ndarray:
    return np.searchsorted(G.elements, codes)


def conjugacy_classes(G: SubgroupSpec) -> list[np.ndarray]:
    e = G.elements
    m = G.m
    a, b, c, d = gl.unpack_arr(e, m)
    det = (a * d - b * c) % m
    dinv = np.array([pow(int(x), -1, m) if m > 1 else 0 for x in det], dtype=np.int64)
    ia, ib, ic, id_ = d * dinv % m, -b * dinv % m, -c * dinv % m, a * dinv % m
    done = np.zeros(e.size, dtype=bool)
    out = []
    for i in range(e.size):
        if done[i]:
            continue
        xa, xb, xc, xd = gl.unpack_arr(e[i : i + 1], m)
        pa, pb = (a * xa + b * xc) % m, (a * xb + b * xd) % m
        pc, pd = (c * xa + d * xc) % m, (c * xb + d * xd) % m
        imgs = np.unique(gl.pack_arr(pa * ia + pb * ic, pa * ib + pb * id_, pc * ia + pd * ic, pc * ib + pd * id_, m))
        done[_index_of(G, imgs)] = True
        out.append(imgs)
    return out


def normal_subgroups(G: SubgroupSpec) -> list[SubgroupSpec]:
    """All normal subgroups, smallest first."""
    m = G.m
    cached = getattr(G, "_normals", None)
    if cached is not None:
        return cached
    closures = []
    for cls in conjugacy_classes(G):
        N = SubgroupSpec(m, elements=gl._close_codes(cls.tolist(), m, G.cap), gens=())
        N._normal_gens = cls.tolist()
        closures.append(N)
    found: dict[bytes, SubgroupSpec] = {}
    triv = SubgroupSpec(m, elements=np.array([gl.identity_code(m)], dtype=np.int64))
    triv._normal_gens = []
    found[triv.elements.tobytes()] = triv
    frontier = [triv]
    while frontier:
        nxt = []
        for N in frontier:
            for C in closures:
                if np.isin(C.elements, N.elements, assume_unique=True).all():
                    continue
                gens = N._normal_gens + C._normal_gens
                J = SubgroupSpec(m, elements=gl._close_codes(gens, m, G.cap, seed=N.elements))
                key = J.elements.tobytes()
                if key not in found:
                    J._normal_gens = gens
                    found[key] = J
                    nxt.append(J)
        frontier = nxt
    out = sorted(found.values(), key=lambda N: N.order)
    for N in out:
        N.gens = tuple(sorted(set(_trim_gens(N._normal_gens, N.order, m))))
    G._normals = out
    return out


def _trim_gens(gens: list[int], order: int, m: int) -> list[int]:
    keep: list[int] = []
    have = np.array([gl.identity_code(m)], dtype=np.int64)
    for g in gens:
        if have.size == order:
            break
        if not np.isin(g, have):
            keep.append(g)
            have = gl._close_codes(keep, m, gl.DEFAULT_CAP)
    return keep


class Quotient:
    """G/N with cosets numbered 0..n-1 (0 = N itself)."""

    def __init__(self, G: SubgroupSpec, N: SubgroupSpec):
        self.G, self.N = G, N
        m = G.m
        e = G.elements
        self.coset = np.full(e.size, -1, dtype=np.int64)
        reps = []
        for i in range(e.size):
            if self.coset[i] >= 0:
                continue
            x = int(e[i])
            self.coset[_index_of(G, gl.mul_left(x, N.elements, m))] = len(reps)
            reps.append(x)
        self.reps = reps
        n = len(reps)
        self.table = np.zeros((n, n), dtype=np.int64)
        for i, x in enumerate(reps):
            prods = gl.mul_left(x, np.array(reps, dtype=np.int64), m)
            self.table[i] = self.coset[_index_of(G, prods)]
        self.identity = int(self.coset[_index_of(G, np.array([gl.identity_code(m)]))][0])

    @property
    def order(self) -> int:
        return len(self.reps)

    def coset_of(self, code: int) -> int:
        return int(self.coset[np.searchsorted(self.G.elements, code)])

    def elem_order(self, i: int) -> int:
        k, j = 1, i
        while j != self.identity:
            j = int(self.table[j, i])
            k += 1
        return k

    def generators(self) -> list[int]:
        gens: list[int] = []
        have = {self.identity}
        for i in sorted(range(self.order), key=lambda i: -self.elem_order(i)):
            if len(have) == self.order:
                break
            if i in have:
                continue
            gens.append(i)
            have = self._span(gens)
        return gens

    def _span(self, gens) -> set:
        have = {self.identity}
        todo = [self.identity]
        while todo:
            x = todo.pop()
            for g in gens:
                y = int(self.table[x, g])
                if y not in have:
                    have.add(y)
                    todo.append(y)
        return have

    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    def shape(self) -> str:
        n = self.order
        if self.is_abelian():
            if any(self.elem_order(i) == n for i in range(n)):
                return f"Z/{n}"
            return f"abelian({n})"
        return "S3" if n == 6 else f"nonabelian({n})"


def isomorphisms(Q1: Quotient, Q2: Quotient):
    """Yield every isomorphism Q1 -> Q2 as an array of images."""
    if Q1.order != Q2.order:
        return
    gens = Q1.generators()
    ords2: dict[int, list[int]] = {}
    for j in range(Q2.order):
        ords2.setdefault(Q2.elem_order(j), []).append(j)
    choices = [ords2.get(Q1.elem_order(g), []) for g in gens]
    for imgs in itertools.product(*choices):
        phi = _extend_hom(Q1, Q2, gens, imgs)
        if phi is not None and len(set(phi.tolist())) == Q1.order:
            yield phi


def _extend_hom(Q1, Q2, gens, imgs):
    phi = np.full(Q1.order, -1, dtype=np.int64)
    phi[Q1.identity] = Q2.identity
    todo = [Q1.identity]
    while todo:
        x = todo.pop()
        for g, h in zip(gens, imgs):
            y = int(Q1.table[x, g])
            w = int(Q2.table[phi[x], h])
            if phi[y] < 0:
                phi[y] = w
                todo.append(y)
            elif phi[y] != w:
                return None
    return phi


# fibered products ------------------------------------------------------------------------

@dataclass
class FiberedProductSpec:
    G1: SubgroupSpec
    G2: SubgroupSpec
    K1: SubgroupSpec
    K2: SubgroupSpec
    pairing: dict[int, int]  # K1-coset representative code -> K2-coset representative code
    quotient_order: int = field(init=False)

    def __post_init__(self):
        self.quotient_order = self.G1.order // self.K1.order

    @property
    def m1(self) -> int:
        return self.G1.m

    @property
    def m2(self) -> int:
        return self.G2.m

    def quotient_shape(self) -> str:
        return Quotient(self.G1, self.K1).shape()


def crt_arr(x1: np.ndarray, m1: int, x2: np.ndarray, m2: int) -> np.ndarray:
    a1, b1, c1, d1 = gl.unpack_arr(x1, m1)
    a2, b2, c2, d2 = gl.unpack_arr(x2, m2)
    u = pow(m1, -1, m2) if m2 > 1 else 0
    m = m1 * m2

    def j(r1, r2):
        return (r1 + m1 * ((r2 - r1) * u % m2)) % m

    return gl.pack_arr(j(a1, a2), j(b1, b2), j(c1, c2), j(d1, d2), m)


def _build_fibered(G1, K1, G2, K2, phi, Q1: Quotient, Q2: Quotient) -> SubgroupSpec:
    m1, m2 = G1.m, G2.m
    # coset members of G2 by coset index
    members = [G2.elements[Q2.coset == j] for j in range(Q2.order)]
    target = phi[Q1.coset]
    parts = []
    for j in range(Q2.order):
        g1 = G1.elements[target == j]
        if g1.size == 0:
            continue
        g2 = members[j]
        parts.append(crt_arr(np.repeat(g1, g2.size), m1, np.tile(g2, g1.size), m2))
    elems = np.concatenate(parts)
    gens = []
    for x1 in G1.small_generators:
        y2 = int(members[int(phi[Q1.coset_of(x1)])][0])
        gens.append(int(crt_arr(np.array([x1]), m1, np.array([y2]), m2)[0]))
    one1 = np.array([gl.identity_code(m1)])
    for n2 in K2.small_generators:
        gens.append(int(crt_arr(one1, m1, np.array([n2]), m2)[0]))
    return SubgroupSpec(m1 * m2, gens, elements=elems)


class PairingError(ValueError):
    pass


def fibered_product(G1, K1, G2, K2, pairing: dict[int, int]) -> SubgroupSpec:
    Q1, Q2 = Quotient(G1, K1), Quotient(G2, K2)
    if Q1.order != Q2.order:
        raise PairingError("quotients have different orders")
    phi = np.full(Q1.order, -1, dtype=np.int64)
    for x1, x2 in pairing.items():
        phi[Q1.coset_of(x1)] = Q2.coset_of(x2)
    if (phi < 0).any() or len(set(phi.tolist())) != Q1.order:
        raise PairingError("pairing is not a bijection of cosets")
    T1, T2 = Q1.table, Q2.table
    if not (phi[T1] == T2[phi[:, None], phi[None, :]]).all():
        raise PairingError("pairing is not a homomorphism")
    return _build_fibered(G1, K1, G2, K2, phi, Q1, Q2)


def goursat_decompose(G: SubgroupSpec, m1: int, m2: int) -> FiberedProductSpec:
    if m1 * m2 != G.m or gcd(m1, m2) != 1:
        raise ma.BadFactorization(f"{G.m} != {m1}*{m2} with coprime factors")
    e = G.elements
    x1 = gl.reduce_arr(e, G.m, m1)
    x2 = gl.reduce_arr(e, G.m, m2)
    G1, G2 = G.image(m1), G.image(m2)
    K1 = SubgroupSpec(m1, elements=x1[x2 == gl.identity_code(m2)])
    K2 = SubgroupSpec(m2, elements=x2[x1 == gl.identity_code(m1)])
    Q1, Q2 = Quotient(G1, K1), Quotient(G2, K2)
    pairing: dict[int, int] = {}
    c1 = Q1.coset[np.searchsorted(G1.elements, x1)]
    c2 = Q2.coset[np.searchsorted(G2.elements, x2)]
    for i, j in set(zip(c1.tolist(), c2.tolist())):
        pairing[Q1.reps[i]] = Q2.reps[j]
    if len(pairing) != Q1.order:
        raise ArithmeticError("projection data is not a fibered product")
    return FiberedProductSpec(G1, G2, K1, K2, pairing)


def goursat_roundtrip(G: SubgroupSpec, m1: int | None = None, m2: int | None = None) -> dict:
    """Decompose over m = m1*m2 (first prime-power part by default), rebuild, compare."""
    if m1 is None:
        m1 = ma.prime_power_parts(G.m)[0]
    if m2 is None:
        m2 = G.m // m1
    fp = goursat_decompose(G, m1, m2)
    rebuilt = fibered_product(fp.G1, fp.K1, fp.G2, fp.K2, fp.pairing)
    return {"m1": m1, "m2": m2, "order": G.order,
            "G1_order": fp.G1.order, "G2_order": fp.G2.order,
            "quotient_order": fp.quotient_order, "quotient_shape": fp.quotient_shape(),
            "roundtrip": bool(np.array_equal(rebuilt.elements, G.elements))}


def is_gl2_induced(G: SubgroupSpec, K: SubgroupSpec, eta: dict[int, int]):
    """Verdict: some g in GL2(Z/m) normalising G induces eta on G/K (eta maps coset reps)."""
    Q = Quotient(G, K)
    perm = np.full(Q.order, -1, dtype=np.int64)
    for x, y in eta.items():
        perm[Q.coset_of(x)] = Q.coset_of(y)
    if (perm < 0).any() or len(set(perm.tolist())) != Q.order:
        raise ValueError("eta is not a permutation of cosets")
    if not (perm[Q.table] == Q.table[perm[:, None], perm[None, :]]).all():
        raise ValueError("eta is not an automorphism")
    m = G.m
    amb = gl.ambient(m)
    coset_of = np.full(m**4, -1, dtype=np.int64)
    coset_of[G.elements] = Q.coset
    ok = np.ones(amb.order, dtype=bool)
    for x in G.small_generators:
        ok &= coset_of[amb.conj_images(x)] == perm[Q.coset_of(x)]
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return gl.Verdict(False)
    return gl.Verdict(True, ma.from_code(int(amb.codes[hits[0]]), m))


# classification --------------------------------------------------------------------------

@dataclass
class ClassifiedGroup:
    group: SubgroupSpec
    genus: mc.GenusReport
    missing: list[int]
    route: str
    audit: dict

    def to_dict(self) -> dict:
        G = self.group
        return {**G.to_record(), "order": G.order, "index": ma.gl2_order(G.m) // G.order,
                "minus_I": G.contains_minus_I, "missing": self.missing,
                "genus": self.genus.to_dict(), "route": self.route, "audit": self.audit}


def maximal_filter(cands: list[SubgroupSpec]) -> list[SubgroupSpec]:
    """Drop conjugate duplicates and anything subconjugate to another candidate."""
    uniq: list[SubgroupSpec] = []
    for G in sorted(cands, key=lambda H: -H.order):
        if not any(gl.is_conjugate(G, H) for H in uniq if H.order == G.order):
            uniq.append(G)
    return [G for G in uniq
            if not any(H.order > G.order and gl.is_subconjugate(G, H) for H in uniq)]


def _dedupe(groups: list[SubgroupSpec]) -> list[SubgroupSpec]:
    out: list[SubgroupSpec] = []
    by_fp: dict[tuple, list[SubgroupSpec]] = {}
    for G in groups:
        bucket = by_fp.setdefault(G.fingerprint, [])
        if not any(gl.is_conjugate(G, H) for H in bucket):
            bucket.append(G)
            out.append(G)
    return out


def _genus(G: SubgroupSpec) -> int:
    return mc.genus_of(G)


def factor_candidates(n: int, g: int = 0) -> list[SubgroupSpec]:
    """Classes of subgroups of GL2(Z/n) with onto det, onto trace, genus <= g."""
    cache = _FACTOR_CACHE.setdefault(g, {})
    if n in cache:
        return cache[n]
    if n == 1:
        out = [gl.full_group(1)]
    elif ma.is_prime_power(n):
        out = [G for G in sl.lattice(n).specs()
               if gl.has_full_det(G) and has_full_trace(G) and _genus(G) <= g]
    else:
        q1 = ma.prime_power_parts(n)[0]
        out = [G for G in _all_fibered(factor_candidates(q1, g), factor_candidates(n // q1, g),
                                       include_direct=True)
               if gl.has_full_det(G) and has_full_trace(G) and _genus(G) <= g]
        out = _dedupe(out)
    cache[n] = out
    return out


_FACTOR_CACHE: dict[int, dict[int, list[SubgroupSpec]]] = {}


def _all_fibered(F1, F2, include_direct: bool):
    for G1 in F1:
        N1s = normal_subgroups(G1)
        for G2 in F2:
            N2s = normal_subgroups(G2)
            for K1 in N1s:
                idx = G1.order // K1.order
                if idx == 1 and not include_direct:
                    continue
                for K2 in N2s:
                    if G2.order // K2.order != idx:
                        continue
                    Q1, Q2 = Quotient(G1, K1), Quotient(G2, K2)
                    for phi in isomorphisms(Q1, Q2):
                        yield _build_fibered(G1, K1, G2, K2, phi, Q1, Q2)


def supported_level(m: int, allowed=EXTENDED_LEVELS, deep: bool = False) -> bool:
    if m == 1:
        return True
    parts_ok = all(q in sl.SUPPORTED for q in ma.prime_power_parts(m))
    if not parts_ok:
        return False
    rad = ma.squarefree_kernel(m)
    levels = [s for s in allowed if deep or s not in DEEP_LEVELS]
    return any(m % s == 0 and s % rad == 0 for s in levels if s > 1)


def classify(genus_target: int = 0, level: int = 2, allowed_sl2_levels=EXTENDED_LEVELS,
             deep: bool = False) -> list[ClassifiedGroup]:
    """Maximal new missing trace groups of the given genus and GL2-level."""
    m = level
    if m < 2:
        raise UnsupportedLevel("level must be at least 2")
    if not supported_level(m, allowed_sl2_levels, deep):
        raise UnsupportedLevel(
            f"level {m} is outside the supported set (prime-power parts in {sl.SUPPORTED}, "
            "SL2-level whitelist closure)")
    if ma.is_prime_power(m):
        pool = sl.lattice(m).specs()
        route = "lattice"
    else:
        q1 = ma.prime_power_parts(m)[0]
        pool = list(_all_fibered(factor_candidates(q1, genus_target),
                                 factor_candidates(m // q1, genus_target), include_direct=False))
        route = "goursat"
    cands = [G for G in pool
             if gl.has_full_det(G) and is_new_missing_trace(G) and G.gl2_level == m
             and _genus(G) == genus_target]
    cands = maximal_filter(cands)
    out = []
    for G in sorted(cands, key=_sort_key):
        out.append(ClassifiedGroup(G, mc.genus(G), missing_residues(G), route, _audit(G)))
    return out


def _sort_key(G: SubgroupSpec):
    return (-G.order, tuple(missing_residues(G)), G.fingerprint, tuple(G.elements[:64].tolist()))


def _audit(G: SubgroupSpec) -> dict:
    mg, ms = G.gl2_level, G.sl2_level
    dG = d_of_group(G)
    audit = {"gl2_level": mg, "sl2_level": ms, "d_G": dG,
             "level_bound": (dG * ms) % mg == 0,
             "supported_on_sl2_primes": ma.squarefree_kernel(mg) == ma.squarefree_kernel(ms) or ms % ma.squarefree_kernel(mg) == 0}
    if mg != ms:
        hat = gl.preimage(G.image(ms), mg)
        d = ma.squarefree_kernel(mg // ms)
        audit["lift_factor"] = mg // ms
        audit["hat_trace_full"] = has_full_trace(hat.image(hat.gl2_level))
        audit["hat_admissible"] = is_d_admissible(hat.image(hat.gl2_level), d)
    return audit
