import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anyonvm.fixtures import SIX_J_PAIR_FUSION, SIX_J_VALUES
from anyonvm.recoupling import (
    CHARGES,
    KAUFFMAN_A,
    RecouplingError,
    admissible,
    build_tables,
    charge,
    default_tables,
    dump_tables,
    fusion_channels,
    perturbed,
    r_formula,
    r_move,
    verify_hexagon,
    verify_pentagon,
    verify_unitarity,
)

charges = st.sampled_from(CHARGES)


@pytest.fixture(scope="module")
def tables():
    return default_tables()


def test_fusion_rules():
    assert admissible(1, 1, 2)
    assert not admissible(1, 1, 1)  # parity
    assert not admissible(3, 3, 4)  # a + b + c > 2k
    assert not admissible(4, 4, 2)
    assert admissible(2, 2, 4)
    assert fusion_channels(2, 2) == (0, 2, 4)
    assert fusion_channels(1, 3) == (2, 4)
    assert fusion_channels(4, 4) == (0,)  # level truncation
    assert fusion_channels(3, 3) == (0, 2)


@given(charges, charges, charges)
def test_admissibility_symmetric(a, b, c):
    assert admissible(a, b, c) == admissible(b, a, c) == admissible(c, b, a)


def test_charge_rejects_out_of_range():
    for bad in (-1, 5, 1.5, True):
        with pytest.raises(RecouplingError):
            charge(bad)


def test_kauffman_constant():
    assert KAUFFMAN_A == pytest.approx(1j * cmath.exp(-1j * math.pi / 12))


def test_quantum_dimensions(tables):
    want = [1, math.sqrt(3), 2, math.sqrt(3), 1]
    assert [tables.qdim[c] for c in CHARGES] == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("labels, value", SIX_J_VALUES)
def test_printed_six_j(tables, labels, value):
    assert tables.six_j(*labels) == pytest.approx(value, abs=1e-9)


@pytest.mark.parametrize("labels, power, value", SIX_J_PAIR_FUSION)
def test_pair_fusion_six_j_magnitudes(tables, labels, power, value):
    assert abs(tables.six_j(*labels)) ** power == pytest.approx(value, abs=1e-9)


def test_inadmissible_six_j_is_zero(tables):
    assert tables.six_j(1, 1, 1, 1, 1, 1) == 0.0


def test_f_matrices_orthogonal(tables):
    for x in itertools.product(CHARGES, repeat=4):
        es, fs, F = tables.f_matrix(*x)
        if not es:
            continue
        assert len(es) == len(fs)
        np.testing.assert_allclose(F @ F.T, np.eye(len(es)), atol=1e-12)


def test_r_symbols_printed():
    assert r_move(1, 2, 1) == pytest.approx(-cmath.exp(1j * math.pi / 3))
    assert r_move(1, 2, 3) == pytest.approx(-cmath.exp(-1j * math.pi / 6))


@given(charges, charges, charges)
def test_r_move_matches_formula_and_is_phase(a, b, c):
    if not admissible(a, b, c):
        with pytest.raises(RecouplingError):
            r_move(a, b, c)
        return
    r = r_move(a, b, c)
    assert abs(r) == pytest.approx(1)
    assert r == pytest.approx(r_formula(a, b, c))
    assert r == pytest.approx(r_move(b, a, c))


def test_inverse_r_is_conjugate(tables):
    assert tables.r(1, 2, 3, -1) * tables.r(1, 2, 3) == pytest.approx(1)


def test_axioms_hold():
    t = build_tables(check=False)
    for report in (verify_unitarity(t), verify_pentagon(t), verify_hexagon(t)):
        assert report.passed, report
        assert report.instances > 0
        assert report.max_deviation < 1e-9


def test_fault_injection_is_detected(tables):
    bad = perturbed(tables, (2, 2, 2, 2, 2, 4), 1e-3)
    assert not verify_pentagon(bad).passed
    assert not verify_unitarity(bad).passed
    assert verify_pentagon(bad).worst_instance is not None


def test_dump_is_deterministic(tables):
    text = dump_tables(tables)
    assert text == dump_tables(build_tables())
    first = text.splitlines()[0].split()
    assert first[0] == "SIXJ" and first[7] == "="
    assert len(text.splitlines()) == len(tables.six_j_u)


def test_bubble_coefficients(tables):
    # theta(a, b, c) / d_c for the pair (1, 1) fused to 2
    assert tables.bubble_coeff[1, 1, 2] == pytest.approx(math.sqrt(6) / 2)  # sqrt(d1 d1 d2) / d2
