import itertools

import pytest
from hypothesis import given, strategies as st

from missingtrace import modarith as ma
from missingtrace.modarith import ResidueMatrix as RM


def M(rows, m):
    return RM.of(rows, m)


def test_products():
    u = M([[1, 1], [0, 1]], 3)
    assert (u @ u).rows() == [[1, 2], [0, 1]]
    g = M([[1, 1], [0, 5]], 6)
    assert (g @ g) == ma.identity(6)
    assert ma.identity(6) @ g == g


def test_modulus_mismatch():
    with pytest.raises(ma.ModulusMismatch):
        ma.identity(2) @ ma.identity(3)


@pytest.mark.parametrize("m", [2, 5, 12])
def test_unipotent_inverse(m):
    assert ma.mat_inv(M([[1, 1], [0, 1]], m)).rows() == [[1, m - 1], [0, 1]]
    assert ma.mat_inv(ma.identity(m)) == ma.identity(m)


def test_singular_inverse():
    with pytest.raises(ma.NonUnitDeterminant):
        ma.mat_inv(M([[0, 1], [2, 0]], 4))


def test_crt_split_examples():
    a, b = ma.crt_split(M([[1, 1], [0, 5]], 6), 2, 3)
    assert a.rows() == [[1, 1], [0, 1]] and b.rows() == [[1, 1], [0, 2]]
    a, b = ma.crt_split(M([[5, 19], [21, 8]], 28), 4, 7)
    assert a.rows() == [[1, 3], [1, 0]] and b.rows() == [[5, 5], [0, 1]]
    with pytest.raises(ma.BadFactorization):
        ma.crt_split(ma.identity(12), 2, 6)


def test_crt_roundtrip_mod_14_exhaustive():
    for a, b, c, d in itertools.product(range(14), repeat=4):
        x = RM(14, a, b, c, d)
        assert ma.crt_join(*ma.crt_split(x, 2, 7)) == x


def test_reduce():
    x = M([[5, 19], [21, 8]], 28)
    assert ma.reduce(x, 28) == x
    assert ma.reduce(x, 2).rows() == [[1, 1], [1, 0]]
    assert ma.reduce(x, 1).rows() == [[0, 0], [0, 0]]
    with pytest.raises(ma.NotDivisor):
        ma.reduce(x, 3)


@given(st.integers(2, 40), st.lists(st.integers(0, 10**6), min_size=4, max_size=4))
def test_pack_roundtrip(m, entries):
    x = RM(m, *entries)
    assert ma.from_code(x.key(), m) == x
    assert ma.code_det(x.key(), m) == x.det
    assert ma.code_tr(x.key(), m) == x.tr


@given(st.integers(2, 30), st.data())
def test_code_mul_matches_matrix_mul(m, data):
    ents = st.lists(st.integers(0, m - 1), min_size=4, max_size=4)
    x, y = RM(m, *data.draw(ents)), RM(m, *data.draw(ents))
    assert ma.code_mul(x.key(), y.key(), m) == (x @ y).key()


def test_group_orders_against_count():
    from oracles import gl2_elements
    for m in (2, 3, 4, 6):
        assert ma.gl2_order(m) == len(gl2_elements(m))
    assert ma.sl2_order(5) == 120


def test_integer_helpers():
    assert ma.divisors(28) == [1, 2, 4, 7, 14, 28]
    assert ma.prime_power_parts(28) == [4, 7]
    assert ma.primes_upto(20) == [2, 3, 5, 7, 11, 13, 17, 19]
    assert ma.is_prime_power(9) and not ma.is_prime_power(12)
    assert ma.euler_phi(28) == 12


def test_parse_matrix():
    assert ma.parse_matrix("[[1,2],[3,4]]", 5).rows() == [[1, 2], [3, 4]]
