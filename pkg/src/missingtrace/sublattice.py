"""Conjugacy classes of subgroups of GL2(Z/qZ) for small prime powers q.

Cyclic extension: every solvable subgroup K has a normal subgroup H of prime
index, so K = <H, g> with g normalising H and g^p in H.  Starting from the
trivial group, plus the perfect group SL2(Z/p) for p >= 5, this reaches every
class.  Duplicates are removed with a class-count fingerprint followed by a
vectorised conjugator search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import grouplat as gl
from . import modarith as ma

log = logging.getLogger(__name__)

# |GL2(Z/q)| must stay small enough for whole-lattice enumeration
SUPPORTED = (2, 3, 4, 5, 7, 8, 9)


class UnsupportedLevel(ValueError):
    pass


@dataclass
class SubgroupClass:
    codes: np.ndarray
    mask: np.ndarray
    gens: list[int]
    fp: bytes
    normalizer: np.ndarray | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return int(self.codes.size)

    def spec(self, q: int) -> gl.SubgroupSpec:
        return gl.SubgroupSpec(q, self.gens, elements=self.codes)


class Lattice:
    """Subgroup classes of GL2(Z/qZ), one representative per conjugacy class."""

    def __init__(self, q: int):
        if q not in SUPPORTED:
            raise UnsupportedLevel(f"subgroup enumeration supports q in {SUPPORTED}, not {q}")
        self.q = q
        self.amb = gl.ambient(q)
        self.class_id = np.full(q**4, -1, dtype=np.int32)
        ncls = 0
        for x in self.amb.codes.tolist():
            if self.class_id[x] < 0:
                self.class_id[np.unique(self.amb.conj_images(x))] = ncls
                ncls += 1
        self.nclasses = ncls
        self.classes: list[SubgroupClass] = []
        self._by_fp: dict[bytes, list[int]] = {}
        self._build()

    # helpers
    def _fingerprint(self, codes: np.ndarray) -> bytes:
        return np.bincount(self.class_id[codes], minlength=self.nclasses).astype(np.int32).tobytes()

    def _make(self, codes: np.ndarray, gens: list[int]) -> SubgroupClass:
        return SubgroupClass(codes, self.amb.mask(codes), gens, self._fingerprint(codes))

    def _conj_ok(self, gens: list[int], target_mask: np.ndarray) -> np.ndarray:
        ok = np.ones(self.amb.order, dtype=bool)
        for x in gens:
            ok &= target_mask[self.amb.conj_images(x)]
        return ok

    def find(self, codes: np.ndarray, gens: list[int]) -> int | None:
        """Index of the class containing the subgroup with these elements, if known."""
        fp = self._fingerprint(codes)
        for i in self._by_fp.get(fp, ()):
            if self._conj_ok(gens, self.classes[i].mask).any():
                return i
        return None

    def _add(self, cls: SubgroupClass) -> bool:
        for i in self._by_fp.get(cls.fp, ()):
            if self._conj_ok(cls.gens, self.classes[i].mask).any():
                return False
        self._by_fp.setdefault(cls.fp, []).append(len(self.classes))
        self.classes.append(cls)
        return True

    def normalizer(self, cls: SubgroupClass) -> np.ndarray:
        if cls.normalizer is None:
            ok = self._conj_ok(cls.gens, cls.mask)
            cls.normalizer = self.amb.codes[ok]
        return cls.normalizer

    def _seeds(self) -> list[SubgroupClass]:
        q = self.q
        seeds = [self._make(np.array([gl.identity_code(q)], dtype=np.int64), [])]
        if ma.prime_divisors(q)[0] >= 5:
            sl2 = gl.sl2_group(q)
            seeds.append(self._make(sl2.elements, list(gl.kernel_generators(q, 1)[:2])))
        return seeds

    def _build(self) -> None:
        q = self.q
        for s in self._seeds():
            self._add(s)
        i = 0
        while i < len(self.classes):
            H = self.classes[i]
            i += 1
            covered = H.mask.copy()
            for g in self.normalizer(H).tolist():
                if covered[g]:
                    continue
                # order of g modulo H
                powers = [g]
                y = g
                while not H.mask[y]:
                    y = ma.code_mul(y, g, q)
                    powers.append(y)
                k = len(powers)
                if not ma.is_prime(k):
                    continue
                cosets = [H.codes] + [gl.mul_left(x, H.codes, q) for x in powers[:-1]]
                codes = np.unique(np.concatenate(cosets))
                covered[codes] = True
                self._add(self._make(codes, H.gens + [g]))
        log.debug("GL2(Z/%d): %d subgroup classes", q, len(self.classes))

    def specs(self) -> list[gl.SubgroupSpec]:
        return [c.spec(self.q) for c in self.classes]


_CACHE: dict[int, Lattice] = {}


def lattice(q: int) -> Lattice:
    if q not in _CACHE:
        _CACHE[q] = Lattice(q)
    return _CACHE[q]
