import numpy as np
import pytest

from missingtrace import grouplat as gl
from missingtrace import modarith as ma
from missingtrace import mtclassify as mt


def test_trace_sets(groups):
    assert mt.trace_set(groups["2,1,1"].spec(), 2) == {0}
    assert mt.trace_set(groups["3,1,1"].spec(), 3) == {0, 2}
    assert mt.has_full_trace(gl.full_group(5))
    fibres = mt.trace_fibers(groups["3,1,1"].spec())
    assert [f.count for f in fibres] == [3, 0, 3]


def test_new_missing_trace(groups):
    assert mt.is_new_missing_trace(groups["2,1,1"].spec())
    G = groups["28,1,1"].spec()
    assert mt.is_new_missing_trace(G)
    assert mt.missing_residues(G) == [7]
    assert mt.has_full_trace(G, 14) and mt.has_full_trace(G, 4)
    assert not mt.is_new_missing_trace(gl.preimage(groups["2,1,1"].spec(), 4))


def _hat_8(groups):
    Gt = gl.adjoin_minus_identity(groups["8,1,1"].spec())
    return gl.preimage(Gt.image(4), 8)


def test_d_of_group(groups):
    assert mt.d_of_group(gl.full_group(5)) == 1
    assert mt.d_of_group(_hat_8(groups)) % 2 == 0
    diag = gl.close([[[1, 0], [0, u]] for u in ma.units(5)], 5)
    assert mt.d_of_group(diag) == 1


def test_admissibility(groups):
    assert mt.is_d_admissible(gl.full_group(4), 1)
    assert mt.is_d_admissible(_hat_8(groups).image(4), 2)
    assert not mt.is_d_admissible(gl.full_group(4), 2)
    with pytest.raises(ValueError):
        mt.is_d_admissible(gl.full_group(4), 4)


def test_goursat_shapes(groups):
    fp = mt.goursat_decompose(gl.full_group(6), 2, 3)
    assert fp.quotient_order == 1
    fp = mt.goursat_decompose(groups["6,1,1"].spec(), 2, 3)
    assert fp.quotient_order == 6 and fp.quotient_shape() == "S3"
    assert gl.is_conjugate(fp.K2, gl.commutator_subgroup(gl.sl2_group(3)))
    fp = mt.goursat_decompose(groups["14,5,1"].spec(), 2, 7)
    assert fp.quotient_order == 3 and fp.quotient_shape() == "Z/3"
    with pytest.raises(ma.BadFactorization):
        mt.goursat_decompose(gl.full_group(12), 2, 6)


def test_direct_product():
    G1, G2 = gl.full_group(2), gl.full_group(3)
    P = mt.fibered_product(G1, G1, G2, G2, {gl.identity_code(2): gl.identity_code(3)})
    assert P.order == G1.order * G2.order


def test_rebuild_and_distinct_pairings(groups):
    built = []
    for label in ("6,1,1", "6,3,1", "6,3,2"):
        G = groups[label].spec()
        fp = mt.goursat_decompose(G, 2, 3)
        H = mt.fibered_product(fp.G1, fp.K1, fp.G2, fp.K2, fp.pairing)
        assert gl.is_conjugate(H, G)
        built.append(H)
    assert not gl.is_conjugate(built[1], built[2])


def test_bad_pairing(groups):
    fp = mt.goursat_decompose(groups["6,1,1"].spec(), 2, 3)
    rep = next(iter(fp.pairing))
    with pytest.raises(mt.PairingError):
        mt.fibered_product(fp.G1, fp.K1, fp.G2, fp.K2, {rep: fp.pairing[rep]})


def _automorphisms(G, K):
    Q = mt.Quotient(G, K)
    for phi in mt.isomorphisms(Q, Q):
        yield {Q.reps[i]: Q.reps[int(j)] for i, j in enumerate(phi)}


def test_gl2_induced(groups):
    G = gl.full_group(2)
    triv = gl.close([], 2)
    autos = list(_automorphisms(G, triv))
    assert len(autos) == 6
    ident = {x: x for x in mt.Quotient(G, triv).reps}
    v = mt.is_gl2_induced(G, triv, ident)
    assert v and v.conjugator == ma.identity(2)
    assert all(mt.is_gl2_induced(G, triv, eta) for eta in autos)
    # cyclic of order 3 inside GL2(Z/2): inversion comes from the swap matrix
    C3 = gl.close([[[1, 1], [1, 0]]], 2)
    x = ma.pack(1, 1, 1, 0, 2)
    inv = {gl.identity_code(2): gl.identity_code(2), x: ma.code_inv(x, 2), ma.code_inv(x, 2): x}
    v = mt.is_gl2_induced(C3, triv, inv)
    assert v
    assert np.array_equal(gl.conjugate(C3, v.conjugator).elements, C3.elements)


def test_maximal_filter(groups):
    G = groups["3,1,1"].spec()
    assert mt.maximal_filter([G]) == [G]
    sub = gl.close([[[1, 1], [0, 1]]], 3)
    assert mt.missing_residues(sub) == [0, 1]
    sub2 = gl.close([[[1, 0], [0, 2]]], 3)
    assert 1 in mt.missing_residues(sub2)
    assert [H.order for H in mt.maximal_filter([sub2, G])] == [6]
    by_level = {}
    for rec in groups.values():
        by_level.setdefault(rec.m, []).append(rec.spec())
    for m, specs in by_level.items():
        assert len(mt.maximal_filter(specs)) == len(specs), m


def _labels(found, groups, m):
    out = []
    for c in found:
        hits = [r.label for r in groups.values() if r.m == m and gl.is_conjugate(r.spec(), c.group)]
        assert len(hits) == 1
        out.append(hits[0])
    return sorted(out)


def test_classify_small_levels(groups):
    assert _labels(mt.classify(0, 2), groups, 2) == ["2,1,1"]
    assert _labels(mt.classify(0, 5), groups, 5) == ["5,1,1", "5,1,2", "5,2,1", "5,2,2"]


@pytest.mark.slow
def test_classify_level_14(groups):
    assert len(set(_labels(mt.classify(0, 14), groups, 14))) == 12


def test_goursat_roundtrip_helper(groups):
    res = mt.goursat_roundtrip(groups["12,4,1"].spec())
    assert res["roundtrip"] and res["m1"] == 4 and res["quotient_order"] == 2


def test_unsupported_level():
    with pytest.raises(mt.UnsupportedLevel):
        mt.classify(0, 11 * 13)
