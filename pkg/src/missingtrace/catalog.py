"""Loading the shipped group and family catalogs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from . import grouplat as gl
from .qpoly import ExprSyntaxError, RatExpr, compose_chain, identity_check, parse_expr


class CatalogError(ValueError):
    """Schema or reference problem in a catalog file."""


def _read_json(path: str | Path | None, default: str) -> Any:
    try:
        if path is None:
            text = resources.files("missingtrace.data").joinpath(default).read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{path or default}: {exc}") from exc


def parse_label(label: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(x) for x in label.split(","))
    except ValueError:
        raise CatalogError(f"bad label {label!r}") from None
    if len(parts) not in (2, 3):
        raise CatalogError(f"bad label {label!r}")
    return parts


def label_key(label: str) -> tuple[int, ...]:
    return parse_label(label)


# groups ---------------------------------------------------------------------------

@dataclass
class GroupRecord:
    label: str
    m: int
    gens: list
    minus_I: bool
    missing: list[int]
    rational_points: bool | None = None
    notes: str | None = None
    _spec: gl.SubgroupSpec | None = field(default=None, repr=False, compare=False)

    def spec(self, cap: int = gl.DEFAULT_CAP) -> gl.SubgroupSpec:
        if self._spec is None:
            self._spec = gl.SubgroupSpec.from_matrices(self.gens, self.m, label=self.label, cap=cap)
        return self._spec

    def to_record(self) -> dict:
        out = {"label": self.label, "m": self.m, "gens": self.gens,
               "minus_I": self.minus_I, "missing": self.missing}
        if self.rational_points is not None:
            out["rational_points"] = self.rational_points
        if self.notes:
            out["notes"] = self.notes
        return out


_GROUP_KEYS = {"label", "m", "gens", "minus_I", "missing"}


def _is_matrix(g) -> bool:
    return (isinstance(g, list) and len(g) == 2
            and all(isinstance(r, list) and len(r) == 2 and all(isinstance(v, int) for v in r) for r in g))


def load_groups(path: str | Path | None = None) -> list[GroupRecord]:
    raw = _read_json(path, "groups.json")
    if not isinstance(raw, list):
        raise CatalogError("group catalog must be a JSON list")
    out = []
    for i, rec in enumerate(raw):
        if not isinstance(rec, dict) or not _GROUP_KEYS <= rec.keys():
            raise CatalogError(f"entry {i}: needs keys {sorted(_GROUP_KEYS)}")
        parse_label(rec["label"])
        gens = rec["gens"]
        if not isinstance(gens, list) or not all(_is_matrix(g) for g in gens):
            raise CatalogError(f"{rec['label']}: generators must be 2x2 integer matrices")
        out.append(GroupRecord(rec["label"], int(rec["m"]), gens, bool(rec["minus_I"]),
                               list(rec["missing"]), rec.get("rational_points"), rec.get("notes")))
    return out


# families -------------------------------------------------------------------------

@dataclass
class Family:
    label: str
    j_name: str
    j: RatExpr
    d: RatExpr
    minus_I: bool
    notes: str | None = None


@dataclass
class Identity:
    name: str
    lhs: list
    rhs: list


class FamilyBook:
    """Named rational functions plus the family and identity lists that refer to them."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict) or "families" not in raw:
            raise CatalogError("family catalog must be an object with a 'families' list")
        self._defs: dict[str, Any] = dict(raw.get("functions", {}))
        self._cache: dict[str, RatExpr] = {}
        self.families: dict[str, Family] = {}
        for rec in raw["families"]:
            try:
                label, j_ref, d_ref = rec["label"], rec["j"], rec["d"]
            except (KeyError, TypeError):
                raise CatalogError(f"family entry {rec!r} lacks label/j/d") from None
            parse_label(label)
            if label in self.families:
                raise CatalogError(f"duplicate family {label}")
            try:
                j = self.resolve(j_ref)
                d = self._resolve_twist(d_ref)
            except ExprSyntaxError as exc:
                raise CatalogError(f"family {label}: {exc}") from exc
            self._cache[f"d{label}"] = d
            self.families[label] = Family(label, j_ref if isinstance(j_ref, str) else "", j, d,
                                          bool(rec.get("minus_I", False)), rec.get("notes"))
        self.identities = [Identity(x["name"], x["lhs"], x["rhs"]) for x in raw.get("identities", [])]

    def names(self) -> list[str]:
        return sorted(self._defs)

    def function(self, name: str) -> RatExpr:
        if name not in self._cache:
            if name not in self._defs:
                raise CatalogError(f"unknown function {name!r}")
            self._cache[name] = self.resolve(self._defs[name])
        return self._cache[name]

    def resolve(self, ref) -> RatExpr:
        """A name, an expression, or a list meaning the composite of its items left to right."""
        if isinstance(ref, list):
            if not ref:
                raise CatalogError("empty composition")
            return compose_chain(*(self.resolve(x) for x in ref))
        if not isinstance(ref, str):
            raise CatalogError(f"cannot resolve {ref!r}")
        if ref in self._defs or ref in self._cache:
            return self.function(ref)
        return parse_expr(ref)

    def _resolve_twist(self, ref) -> RatExpr:
        if isinstance(ref, dict):
            try:
                base = self._cache[f"d{ref['of']}"]
            except KeyError:
                raise CatalogError(f"twist refers to unknown family {ref.get('of')!r}") from None
            return parse_expr(ref["times"]) * base
        return self.resolve(ref)


def load_families(path: str | Path | None = None) -> FamilyBook:
    return FamilyBook(_read_json(path, "families.json"))


@dataclass
class IdentityResult:
    name: str
    holds: bool
    degree: int

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "degree": self.degree}


def check_identity(book: FamilyBook, ident: Identity) -> IdentityResult:
    lhs, rhs = book.resolve(ident.lhs), book.resolve(ident.rhs)
    return IdentityResult(ident.name, identity_check(lhs, rhs), lhs.degree())


def run_identity_suite(book: FamilyBook | None = None) -> list[IdentityResult]:
    book = book or load_families()
    return [check_identity(book, ident) for ident in book.identities]


# joined view ----------------------------------------------------------------------

@dataclass
class CatalogEntry:
    label: str
    group: GroupRecord
    family: Family | None

    @property
    def missing(self) -> list[int]:
        return self.group.missing


def load_catalog(groups_path=None, families_path=None) -> list[CatalogEntry]:
    groups = load_groups(groups_path)
    book = load_families(families_path)
    seen = set()
    out = []
    for g in groups:
        if g.label in seen:
            raise CatalogError(f"duplicate group label {g.label}")
        seen.add(g.label)
        fam = book.families.get(g.label)
        if fam is not None and fam.minus_I != g.minus_I:
            raise CatalogError(f"{g.label}: -I flag differs between group and family files")
        out.append(CatalogEntry(g.label, g, fam))
    return out


def find_group(label: str, path=None) -> GroupRecord:
    for g in load_groups(path):
        if g.label == label:
            return g
    raise CatalogError(f"no group labelled {label!r}")
