import json

import pytest

from missingtrace import catalog as cat
from missingtrace import modcurve as mc
from missingtrace.qpoly import compose, parse_expr


def test_counts(groups, book):
    assert len(groups) == 52
    assert len(book.families) == 50
    assert set(book.families) <= set(groups)
    # the two groups without rational points carry no family
    assert set(groups) - set(book.families) == {"8,2,1", "9,5,1"}


def test_joined_view():
    entries = cat.load_catalog()
    assert [e.label for e in entries][:3] == ["2,1,1", "3,1,1", "3,1,2"]
    assert next(e for e in entries if e.label == "28,1,1").missing == [7]


def test_j_degree_is_index(groups, book):
    for label, fam in book.families.items():
        assert fam.j.degree() == mc.genus(groups[label].spec()).mu, label


def test_identity_suite(book):
    results = cat.run_identity_suite(book)
    assert len(results) >= 20
    failing = [r.name for r in results if not r.holds]
    assert failing == []


def test_sign_flipped_identity_fails(book):
    bad = cat.Identity("flipped", ["j28,1"], ["j7,4", "1/t^2"])
    assert not cat.check_identity(book, bad).holds
    good = cat.Identity("j28,1", ["j28,1"], ["j7,4", "-1/t^2"])
    assert cat.check_identity(book, good).holds


def test_named_compositions(book):
    j145 = book.function("j14,5")
    assert j145 == compose(book.function("f14,1"), book.function("g14,5"))
    assert book.function("j12,4") == compose(book.function("j3,1"), parse_expr("1/(27*t^2)"))


def test_twist_composition(book):
    f = book.families["3,1,2"]
    assert f.d == parse_expr("-3") * book.families["3,1,1"].d


def test_find_group():
    assert cat.find_group("8,2,1").rational_points is False
    with pytest.raises(cat.CatalogError):
        cat.find_group("99,1,1")


@pytest.mark.parametrize("payload, msg", [
    ("{not json", "Expecting"),
    ('{"a": 1}', "JSON list"),
    ('[{"label": "2,1,1"}]', "needs keys"),
    ('[{"label": "2", "m": 2, "gens": [], "minus_I": true, "missing": [1]}]', "bad label"),
    ('[{"label": "2,1,1", "m": 2, "gens": [[1, 2]], "minus_I": true, "missing": [1]}]', "2x2"),
])
def test_group_schema_errors(tmp_path, payload, msg):
    p = tmp_path / "g.json"
    p.write_text(payload)
    with pytest.raises(cat.CatalogError, match=msg):
        cat.load_groups(p)


def test_family_schema_errors(tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps({"families": [{"label": "3,1,1", "j": "nosuch", "d": "D"}]}))
    with pytest.raises(cat.CatalogError, match="3,1,1"):
        cat.load_families(p)
    p.write_text(json.dumps({"families": [{"label": "3,1,1", "j": "t", "d": {"times": "2", "of": "9,9,9"}}]}))
    with pytest.raises(cat.CatalogError, match="unknown family"):
        cat.load_families(p)
    p.write_text(json.dumps({"families": [{"label": "3,1,1", "j": "t", "d": "D"}] * 2}))
    with pytest.raises(cat.CatalogError, match="duplicate"):
        cat.load_families(p)


def test_minus_I_consistency(tmp_path):
    groups = json.loads((cat.resources.files("missingtrace.data") / "groups.json").read_text())
    for g in groups:
        if g["label"] == "3,1,1":
            g["minus_I"] = True
    p = tmp_path / "g.json"
    p.write_text(json.dumps(groups))
    with pytest.raises(cat.CatalogError, match="-I flag"):
        cat.load_catalog(groups_path=p)
