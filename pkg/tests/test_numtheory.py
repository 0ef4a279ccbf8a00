import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from anyonvm.numtheory import (
    A1_ARGUMENT,
    A1_ARGUMENT_DISPLAYED,
    BF_ARGUMENT,
    POLE,
    PoleMarker,
    QuadExtNumber,
    arctan_sum_congruence,
    calcut_quadratic_check,
    calcut_quadratic_values,
    density_sweep,
    is_prime,
    lemma3_check,
    olmsted_empirical,
    phase_report,
    tan_multiple,
    tan_multiples,
    tan_theta_af,
    theta_af,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=60)
q3 = st.builds(lambda a, b: QuadExtNumber(a, b, 3), fractions, fractions)
q3_irrational = q3.filter(lambda x: x.b != 0)
S3 = QuadExtNumber(0, 1, 3)
ONE = QuadExtNumber(1, 0, 3)


def test_basic_arithmetic():
    x = QuadExtNumber(1, 1)
    assert x * x.conjugate() == -2
    assert (x + 1) - 1 == x
    assert x / x == 1
    assert 2 / QuadExtNumber(0, 1) == QuadExtNumber(0, Fraction(2, 3))
    assert float(x) == pytest.approx(1 + math.sqrt(3))
    assert str(QuadExtNumber(Fraction(-1, 2), 3)) == "-1/2 + 3*sqrt(3)"


def test_field_errors():
    with pytest.raises(ZeroDivisionError):
        QuadExtNumber(1, 1) / QuadExtNumber(0, 0)
    with pytest.raises(ValueError):
        QuadExtNumber(1, 1, 3) + QuadExtNumber(1, 1, 2)
    with pytest.raises(ValueError):
        QuadExtNumber(1, 1, 4)


@given(q3, q3)
def test_conjugation_is_a_field_homomorphism(x, y):
    assert (x * y).conjugate() == x.conjugate() * y.conjugate()
    assert (x + y).conjugate() == x.conjugate() + y.conjugate()


@given(q3)
def test_trace_and_norm_are_rational(x):
    assert (x + x.conjugate()).is_rational()
    assert (x * x.conjugate()).is_rational()
    assert x * x.conjugate() == x.norm()


@given(q3, q3)
def test_division_inverts_multiplication(x, y):
    if y.is_zero():
        return
    assert (x / y) * y == x


def test_tan_multiple_small_cases():
    x = QuadExtNumber(Fraction(2, 7), Fraction(1, 5))
    assert tan_multiple(x, 1) == x
    assert tan_multiple(x, 2) == 2 * x / (1 - x * x)
    with pytest.raises(ValueError):
        tan_multiple(x, 0)


def test_poles():
    assert tan_multiple(ONE, 2) is POLE  # 2 * 45 degrees
    assert PoleMarker() is POLE
    assert tan_multiple(S3, 3) == 0  # 3 * 60 degrees is 180 degrees
    assert tan_multiple(S3 / 3, 3) is POLE  # 3 * 30 degrees
    assert tan_multiple(ONE, 3) == -1
    assert tan_multiple(ONE, 4) == 0


@settings(max_examples=25, deadline=None)
@given(q3_irrational)
def test_tan_multiple_commutes_with_conjugation(x):
    for q, (t, tc) in enumerate(zip(tan_multiples(x, 50), tan_multiples(x.conjugate(), 50)), start=1):
        if t is POLE:
            assert tc is POLE
        else:
            assert t.conjugate() == tc, q


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=-3, max_value=3, max_denominator=9), st.integers(1, 12))
def test_tan_multiple_matches_floats(a, q):
    x = QuadExtNumber(a, Fraction(1, 7))
    t = tan_multiple(x, q)
    want = math.tan(q * math.atan(float(x)))
    if t is POLE:
        assert abs(want) > 1e6
    else:
        assert float(t) == pytest.approx(want, rel=1e-6, abs=1e-9)


def test_irrationality_conditions_constructed_failure():
    r = lemma3_check(2, 1, 3)
    assert not r.star and not r.conditions_hold
    assert r.key_rational is None


def test_irrationality_conditions_second_condition():
    # (a - 1)^2 = 2 + p b^2 with a = 4, b = 1, p = 7
    r = lemma3_check(4, 1, 7)
    assert r.star and not r.star_star


def test_irrationality_conditions_passing_case():
    r = lemma3_check(Fraction(1, 2), Fraction(1, 3), 3)
    assert r.conditions_hold and r.key_ok
    assert r.key_rational == 2 * Fraction(1, 2) / (1 - Fraction(1, 4) + Fraction(1, 3))


def test_irrationality_conditions_rejects_bad_input():
    with pytest.raises(ValueError):
        lemma3_check(1, 1, 4)
    with pytest.raises(ValueError):
        lemma3_check(0, 1, 3)


def test_irrationality_conditions_on_ancilla_arguments():
    # exact evaluation: all three arguments have norm a^2 - 3 b^2 = 1, so the first condition fails
    for x in (A1_ARGUMENT, A1_ARGUMENT_DISPLAYED, BF_ARGUMENT):
        assert x.norm() == 1
        r = lemma3_check(x.a, x.b, 3)
        assert not r.star
        assert r.star_star
        assert r.witness == "a^2 = 1 + p b^2 = " + str(x.a ** 2)


def test_rational_tangent_search():
    assert olmsted_empirical(ONE, 4).hits == [(1, "1"), (3, "-1"), (4, "0")]
    assert olmsted_empirical(ONE, 4).poles == [2]
    r = olmsted_empirical(S3, 4)
    assert r.hits == [(3, "0")] and r.poles == []
    with pytest.raises(ValueError):
        olmsted_empirical(S3, 1)


@pytest.mark.parametrize("x", [A1_ARGUMENT, BF_ARGUMENT, A1_ARGUMENT_DISPLAYED, tan_theta_af()])
def test_no_rational_tangent_for_ancilla_phases(x):
    r = olmsted_empirical(x, 200)
    assert r.clean
    assert r.to_json()["coverage"] == "q = 1..200"


def test_tan_theta_is_four_sqrt_three():
    assert tan_theta_af() == QuadExtNumber(0, 4, 3)
    assert math.tan(theta_af()) == pytest.approx(4 * math.sqrt(3))


def test_quadratic_rational_tangents():
    values = calcut_quadratic_values(3)
    assert len(values) == 8
    assert len(calcut_quadratic_values(2)) == 4
    for v in values:
        assert not calcut_quadratic_check(v)
        # every listed value really is the tangent of a rational angle
        assert any(tan_multiple(v, q) is POLE or tan_multiple(v, q) == 0 for q in range(1, 13))
    assert calcut_quadratic_check(BF_ARGUMENT)
    assert calcut_quadratic_check(A1_ARGUMENT)
    assert not calcut_quadratic_check(QuadExtNumber(2, 1))
    assert not calcut_quadratic_check(S3)
    with pytest.raises(ValueError):
        calcut_quadratic_check(ONE)


def test_density_decreases():
    th = theta_af()
    gaps = [density_sweep(th, n).max_gap for n in (100, 1000, 10000)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.01


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 6.2), st.integers(2, 400))
def test_three_distance(theta, n):
    r = density_sweep(theta, n, decimals=7)
    assert len(r.gaps) <= 3


def test_rational_angle_is_not_dense():
    for n in (8, 100, 1000):
        assert density_sweep(math.pi / 2, n).max_gap == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        density_sweep(1.0, 1)


def test_arctan_congruence():
    rng = random.Random(2)
    for _ in range(1000):
        x, y = rng.uniform(-20, 20), rng.uniform(-20, 20)
        assert arctan_sum_congruence(x, y) < 1e-9


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_phase_report_shape():
    r = phase_report(q_max=50, sweep=(100, 1000))
    assert set(r) >= {"theta", "conditions", "q_max", "hits", "gaps"}
    assert r["conditions"]["B_f"]["star"] is False
    assert r["calcut"]["B_f"] is True
    assert [g["N"] for g in r["gaps"]] == [100, 1000]
