"""Consistency checks over the shipped group catalog (or a user-supplied one)."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from . import grouplat as gl
from . import modarith as ma
from . import modcurve as mc
from . import mtclassify as mt
from .catalog import GroupRecord, label_key, load_groups


@dataclass
class EntryReport:
    label: str
    checks: dict[str, bool]
    info: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"label": self.label, "ok": self.ok, "checks": self.checks, "info": self.info}


@dataclass
class CatalogReport:
    entries: list[EntryReport]
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems and all(e.ok for e in self.entries)

    def failures(self) -> list[str]:
        out = [f"{e.label}: {k}" for e in self.entries for k, v in e.checks.items() if not v]
        return out + self.problems

    def to_dict(self) -> dict:
        return {"ok": self.ok, "count": len(self.entries), "failures": self.failures(),
                "entries": [e.to_dict() for e in self.entries]}


def level_data(G: gl.SubgroupSpec) -> dict:
    mg, ms = G.gl2_level, G.sl2_level
    dG = mt.d_of_group(G)
    return {"gl2_level": mg, "sl2_level": ms, "d_G": dG,
            "sl2_divides_gl2": mg % ms == 0,
            "sign_ratio": Fraction(ms, gl.adjoin_minus_identity(G).sl2_level),
            "level_bound": (dG * ms) % mg == 0}


def check_entry(rec: GroupRecord) -> EntryReport:
    G = rec.spec()
    lv = level_data(G)
    checks = {
        "closure_order": ma.gl2_order(rec.m) % G.order == 0,
        "minus_I": G.contains_minus_I == rec.minus_I,
        "det_surjective": gl.has_full_det(G),
        "genus_zero": mc.genus_of(G) == 0,
        "new_missing_trace": mt.is_new_missing_trace(G),
        "missing_matches": mt.missing_residues(G) == sorted(rec.missing),
        "gl2_level": lv["gl2_level"] == rec.m,
        "level_bound": lv["sl2_divides_gl2"] and lv["level_bound"] and lv["sign_ratio"] in (1, 2),
    }
    info = {"order": G.order, "index": ma.gl2_order(rec.m) // G.order, **lv,
            "sign_ratio": str(lv["sign_ratio"])}
    if ma.is_prime_power(rec.m):
        sz = mc.sz_rational_point_test(G)
        info["rational_point_test"] = sz
        expected = True if rec.rational_points is None else rec.rational_points
        checks["rational_points"] = sz == expected
    return EntryReport(rec.label, checks, info)


def _pairwise(records: list[GroupRecord]) -> list[str]:
    """Conjugate pairs and non-maximal entries among groups of equal level.

    A new missing trace group cannot sit inside the preimage of one of lower
    level, so comparisons across levels are unnecessary."""
    problems = []
    by_level: dict[int, list[GroupRecord]] = {}
    for rec in records:
        by_level.setdefault(rec.m, []).append(rec)
    for recs in by_level.values():
        for a, b in itertools.combinations(recs, 2):
            A, B = a.spec(), b.spec()
            if A.order == B.order and gl.is_conjugate(A, B):
                problems.append(f"{a.label} and {b.label} are conjugate")
                continue
            small, big = (a, b) if A.order < B.order else (b, a)
            if small.spec().order < big.spec().order and gl.is_subconjugate(small.spec(), big.spec()):
                problems.append(f"{small.label} is contained in a conjugate of {big.label}")
    return problems


def verify_catalog(path=None, records: list[GroupRecord] | None = None) -> CatalogReport:
    records = load_groups(path) if records is None else records
    problems = [f"label {lab} appears {n} times"
                for lab, n in Counter(r.label for r in records).items() if n > 1]
    entries = [check_entry(r) for r in sorted(records, key=lambda r: label_key(r.label))]
    problems += _pairwise(records)
    return CatalogReport(entries, problems)


def match_catalog(G: gl.SubgroupSpec, records: list[GroupRecord] | None = None) -> str | None:
    """Label of the catalog group conjugate to G, if any."""
    for rec in load_groups() if records is None else records:
        if rec.m == G.m and rec.spec().order == G.order and gl.is_conjugate(rec.spec(), G):
            return rec.label
    return None
