import random
import time
from fractions import Fraction

import pytest

from missingtrace import ecurve as ec
from missingtrace import modarith as ma
from missingtrace.qpoly import eval_expr, parse_expr, squarefree_part

E3 = (1, -1, 1, -56, 163)
E6 = (0, 0, 0, -15876, -777924)
E28 = (0, 0, 0, -7138223372, 232131092574192)


def brute_ap(A, B, p):
    pts = 1 + sum(1 for x in range(p) for y in range(p) if (y * y - x**3 - A * x - B) % p == 0)
    return p + 1 - pts


@pytest.mark.parametrize("coeffs, m, X, prefix, length, missing", [
    (E3, 3, 150, [0, 2, 0, 2, 0, 2, 0, 0, 2], 33, 1),
    (E6, 6, 150, [4, 4, 5, 2, 5, 4, 0, 5], 32, 3),
    (E28, 28, 580, [0, 1, 2, 26, 25, 22], 103, 7),
])
def test_golden_sequences(coeffs, m, X, prefix, length, missing):
    start = time.perf_counter()
    census = ec.trace_census(ec.CurveInstance.from_long(*coeffs), m, X)
    assert time.perf_counter() - start < 1.0
    assert census.sequence[: len(prefix)] == prefix
    assert len(census.sequence) == length
    assert census.counts[missing] == 0


def test_bad_primes():
    assert ec.CurveInstance.from_long(*E3).bad_primes == (2, 3)
    assert ec.CurveInstance.from_long(*E28).bad_primes == (2, 7, 37)


def test_point_count_small():
    curve = ec.CurveInstance(1, 0)
    assert ec.ap(curve, 5) == 2
    for p in (7, 11, 13, 101):
        assert ec.ap(curve, p) == brute_ap(1, 0, p)


def test_ap_errors():
    curve = ec.CurveInstance.from_long(*E28)
    with pytest.raises(ec.BadPrime):
        ec.ap(curve, 37)
    with pytest.raises(ValueError):
        ec.ap(curve, 15)
    with pytest.raises(ec.BadPrime):
        ec.ap(ec.CurveInstance(1, 0), 3)
    with pytest.raises(ec.SingularSpecialization):
        ec.CurveInstance(0, 0)


def test_model_invariance():
    long = ec.CurveInstance.from_long(*E3)
    short = ec.CurveInstance(long.A, long.B)
    scaled = ec.CurveInstance(long.A * 16, long.B * 64)  # u = 2
    for p in ma.primes_upto(400)[3:]:
        a = ec.ap(long, p)
        assert a == ec.ap(short, p) == ec.ap(scaled, p)


def test_long_model_small_primes_brute():
    long = ec.CurveInstance.from_long(*E6)
    # the long model has a1 = a2 = a3 = 0, so a direct count on the same cubic must agree
    for p in (5, 11, 13):
        assert ec.ap(long, p) == brute_ap(-15876, -777924, p)


def test_golden_curves_are_family_members(book):
    for coeffs, label, t0 in ((E3, "3,1,1", 2), (E6, "6,1,1", 1), (E28, "28,1,1", 1)):
        E = ec.CurveInstance.from_long(*coeffs)
        F = ec.specialize(book.families[label], t0, 1)
        assert E.j == F.j
        for p in ma.primes_upto(300)[3:]:
            if E.is_good(p) and F.is_good(p):
                assert ec.ap(E, p) == ec.ap(F, p), (label, p)


def test_rational_three_torsion(book):
    curve = ec.specialize(book.families["3,1,1"], 3, 1)
    census = ec.trace_census(curve, 3, 600)
    for p, r in zip(census.primes, census.sequence):
        assert r == (p + 1) % 3


def test_twisting_exposes_residue(book):
    fam = book.families["3,1,1"]
    d = eval_expr(fam.d, 3, 1)
    right = ec.trace_census(ec.generic_curve(fam.j, 3, d), 3, 500)
    wrong = ec.trace_census(ec.generic_curve(fam.j, 3, -d), 3, 500)
    assert right.counts[1] == 0
    assert wrong.counts[1] > 0


def test_threads_agree(book):
    curve = ec.specialize(book.families["7,1,1"], 2, 1)
    assert ec.trace_census(curve, 7, 2000).sequence == ec.trace_census(curve, 7, 2000, threads=4).sequence


def test_singular_specialization(book):
    with pytest.raises(ec.SingularSpecialization):
        ec.specialize(book.families["2,1,1"], -1, 1)


def test_weierstrass():
    a4, a6 = ec.weierstrass_coeffs(Fraction(54000))
    assert ec.CurveInstance(a4, a6).j == 54000
    with pytest.raises(ec.SingularSpecialization):
        ec.weierstrass_coeffs(Fraction(1728))


# division polynomials -------------------------------------------------------------

def test_psi3_formula():
    A, B = Fraction(3), Fraction(-5)
    psi = ec.division_poly(ec.CurveInstance(A, B), 3)
    assert [Fraction(str(c)) for c in psi.all_coeffs()] == [3, 0, 6 * A, 12 * B, -A * A]


def test_psi3_rational_root(book):
    fam = book.families["3,1,1"]
    roots = ec.rational_roots(ec.division_poly(ec.specialize(fam, 1, 1), 3))
    assert Fraction(2700, 121) in roots
    assert Fraction(-90, 11) in ec.rational_roots(ec.division_poly(ec.generic_curve(fam.j, 1, 1), 3))


def test_division_degrees():
    curve = ec.CurveInstance(2, 3)
    assert ec.division_poly(curve, 7).degree() == 24
    assert ec.division_poly(curve, 5).degree() == 12
    assert ec.division_poly(curve, 8).degree() == 30
    with pytest.raises(ValueError):
        ec.division_poly(curve, 7, p=7)


def test_division_mod_p_counts_torsion():
    # 5 | #E(F_p) forces a point of order 5, whose x-coordinate is a root of psi_5 mod p
    curve = ec.CurveInstance(2, 3)
    hits = 0
    for p in ma.primes_upto(200)[3:]:
        if not curve.is_good(p) or (p + 1 - ec.ap(curve, p)) % 5:
            continue
        psi = ec.division_poly(curve, 5, p)
        assert any(psi.eval(x) % p == 0 for x in range(p)), p
        hits += 1
    assert hits >= 3


X3 = parse_expr("18*D*(t+1)*(t+9)/(t^2-18*t-27)")
R3 = parse_expr("6*D*(t+1)*(t+9)/(t^2-18*t-27)")
X5 = parse_expr("-6*D*(t^2-6*t+1)*(t^4-12*t^3+14*t^2+12*t+1)/((t^2+1)*(t^4-18*t^3+74*t^2+18*t+1))")
R5 = parse_expr("-2*D*(t^4-12*t^3+14*t^2+12*t+1)/((t^2+1)*(t^4-18*t^3+74*t^2+18*t+1))")
Q4 = "(t^4-490*t^3-21609*t^2-235298*t-823543)"
CUBIC7 = [
    parse_expr("1"),
    parse_expr(f"-126*D*(t^2+13*t+49)*(t^2+245*t+2401)/{Q4}"),
    parse_expr(f"108*D^2*(t^2+13*t+49)*(t^2+245*t+2401)^2*(33*t^2+637*t+2401)/{Q4}^2"),
    parse_expr(f"-216*D^3*(t^2+13*t+49)*(t^2+245*t+2401)^3"
               f"*(881*t^4+38122*t^3+525819*t^2+3058874*t+5764801)/(7*{Q4}^3)"),
]
SAMPLES = [(t, D) for t in (1, 2, 5) for D in (1, -1)]


def test_level3_linear_factor(book):
    j = book.function("j3,1")
    assert ec.verify_torsion_factor(j, 3, [parse_expr("1"), -X3], SAMPLES)
    assert not ec.verify_torsion_factor(j, 3, [parse_expr("1"), -X3 + 1], SAMPLES)


def test_level7_cubic_factor(book):
    j = book.function("j7,4")
    assert ec.verify_torsion_factor(j, 7, CUBIC7, [(1, 1), (2, 1), (3, -1)])
    perturbed = CUBIC7[:3] + [CUBIC7[3] + 1]
    assert not ec.verify_torsion_factor(j, 7, perturbed, [(1, 1), (2, 1)])


def test_level5_linear_factor(book):
    assert ec.verify_torsion_factor(book.function("j5,1"), 5, [parse_expr("1"), -X5], SAMPLES)


def test_quadratic_subfields(book):
    j3, j5 = book.function("j3,1"), book.function("j5,1")
    for t, D in SAMPLES:
        c3 = ec.generic_curve(j3, t, D)
        assert ec.quad_subfield_of_point(c3, eval_expr(X3, t, D)) == squarefree_part(eval_expr(R3, t, D))
        c5 = ec.generic_curve(j5, t, D)
        assert ec.quad_subfield_of_point(c5, eval_expr(X5, t, D)) == squarefree_part(eval_expr(R5, t, D))


def test_two_torsion_point_rejected():
    with pytest.raises(ValueError):
        ec.quad_subfield_of_point(ec.CurveInstance(-1, 0), 0)


def test_discriminant_fields(book):
    assert ec.delta_field_checks(ec.specialize(book.families["4,1,1"], 2, 1))["sqrt_disc_field"] == -1
    assert ec.delta_field_checks(ec.CurveInstance(-1, 0))["sqrt_disc_field"] == 1
    rng = random.Random(5)
    fam = book.families["6,2,1"]
    checked = 0
    while checked < 4:
        t0 = Fraction(rng.randint(-40, 40), rng.randint(1, 9))
        try:
            curve = ec.specialize(fam, t0, rng.choice([1, 2, -7]))
        except (ec.SingularSpecialization, ZeroDivisionError):
            continue
        assert ec.delta_field_checks(curve)["sqrt_disc_field"] == -3
        checked += 1
