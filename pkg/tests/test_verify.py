import copy

from missingtrace import catalog as cat
from missingtrace import grouplat as gl
from missingtrace import verify
from missingtrace.modarith import ResidueMatrix


def test_shipped_catalog_passes():
    report = verify.verify_catalog()
    assert report.ok, report.failures()
    assert len(report.entries) == 52
    checks = {k for e in report.entries for k in e.checks}
    assert {"closure_order", "det_surjective", "genus_zero", "new_missing_trace",
            "missing_matches", "level_bound", "rational_points"} <= checks


def test_rational_point_flags():
    report = verify.verify_catalog()
    info = {e.label: e.info for e in report.entries}
    assert info["8,2,1"]["rational_point_test"] is False
    assert info["9,5,1"]["rational_point_test"] is False
    assert info["8,1,1"]["rational_point_test"] is True


def test_level_properties():
    for e in verify.verify_catalog().entries:
        lv = e.info
        assert lv["gl2_level"] % lv["sl2_level"] == 0
        assert lv["sign_ratio"] in ("1", "2")
        assert (lv["d_G"] * lv["sl2_level"]) % lv["gl2_level"] == 0


def test_duplicate_entry_flagged():
    records = cat.load_groups()
    dup = copy.copy(next(r for r in records if r.label == "7,2,1"))
    dup.label = "7,9,1"
    report = verify.verify_catalog(records=records + [dup])
    assert not report.ok
    assert any("7,2,1 and 7,9,1" in f or "7,9,1 and 7,2,1" in f for f in report.failures())


def test_duplicate_label_flagged():
    records = cat.load_groups()
    report = verify.verify_catalog(records=records + [copy.copy(records[0])])
    assert any("appears 2 times" in f for f in report.failures())


def test_non_maximal_entry_flagged():
    records = [r for r in cat.load_groups() if r.m == 3]
    # diagonal subgroup of order 2: a genus zero missing trace group in its own right,
    # but it sits inside both Borel catalog groups, so only maximality fails
    sub = cat.GroupRecord("3,9,1", 3, [[[1, 0], [0, 2]]], False, [1])
    report = verify.verify_catalog(records=records + [sub])
    assert next(e for e in report.entries if e.label == "3,9,1").ok
    assert sorted(report.failures()) == ["3,9,1 is contained in a conjugate of 3,1,1",
                                         "3,9,1 is contained in a conjugate of 3,1,2"]


def test_wrong_rational_point_flag():
    records = cat.load_groups()
    for r in records:
        if r.label == "8,2,1":
            r.rational_points = None
    report = verify.verify_catalog(records=[r for r in records if r.m == 8])
    assert "8,2,1: rational_points" in report.failures()


def test_match_catalog():
    g = cat.find_group("12,3,1").spec()
    h = gl.conjugate(g, ResidueMatrix.of([[5, 1], [0, 1]], 12))
    assert verify.match_catalog(h) == "12,3,1"
    assert verify.match_catalog(gl.full_group(12)) is None
