import pytest

from missingtrace import grouplat as gl
from missingtrace import modarith as ma
from missingtrace import modcurve as mc
from oracles import x0_genus, x_full_genus


def borel(N):
    gens = [[[1, 1], [0, 1]]]
    for u in ma.units(N):
        gens += [[[u, 0], [0, 1]], [[1, 0], [0, u]]]
    return gl.close(gens, N)


@pytest.mark.parametrize("N", range(2, 31))
def test_x0_genus_oracle(N):
    assert mc.genus_of(borel(N)) == x0_genus(N)


@pytest.mark.parametrize("N", [3, 4, 5, 6, 7, 8])
def test_full_level_genus_oracle(N):
    # the kernel of reduction plus arbitrary determinant: X(N)
    G = gl.close([[[1, 0], [0, u]] for u in ma.units(N)], N)
    assert mc.genus_of(G) == x_full_genus(N)


def test_genus_report_fields():
    rep = mc.genus(gl.full_group(2))
    assert rep.genus == 0 and rep.mu == 1
    d = rep.to_dict()
    assert set(d) == {"mu", "nu2", "nu3", "cusps", "genus"}
    assert mc.genus(borel(11)).genus == 1


def test_catalog_genus_zero(groups):
    for rec in groups.values():
        G = rec.spec()
        assert mc.genus_of(gl.adjoin_minus_identity(G)) == 0, rec.label
        assert mc.genus_of(G) == 0, rec.label


def test_rational_point_criterion(groups):
    assert mc.sz_rational_point_test(groups["8,1,1"].spec())
    assert not mc.sz_rational_point_test(groups["8,2,1"].spec())
    assert not mc.sz_rational_point_test(groups["9,5,1"].spec())
    assert mc.sz_rational_point_test(gl.full_group(4))


def test_rational_point_criterion_needs_prime_power(groups):
    with pytest.raises(mc.NotPrimePowerLevel):
        mc.sz_rational_point_test(groups["6,1,1"].spec())
