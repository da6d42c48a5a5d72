"""Basis elements of L(n*0 + a): formulas, parity, poles, expansions."""

import numpy as np
import pytest

from aeop.basis import (
    APolyCoeffs,
    Contour,
    anchor_config,
    apoly_from_dict,
    b1_eval,
    b1_zeta_form,
    basis_deriv,
    basis_eval,
    basis_matrix,
    eval_apoly,
    eval_apoly_deriv,
    has_pole_at_a,
    laurent_leading,
    laurent_leading_fit,
)
from aeop.errors import NonFinite, PoleAt, ZeroFunction
from aeop.lattice import lattice_from_branch_points, wp, wp_prime

RNG = np.random.default_rng(7)


@pytest.fixture(scope="module")
def square():
    return lattice_from_branch_points(1.0, 0.0, -1.0)


@pytest.fixture(scope="module")
def anc(square):
    return anchor_config(square.omega1, Contour.GAMMA2, square)


def random_interior(lat, count):
    t = RNG.uniform(0.08, 0.92, size=count)
    s = RNG.uniform(0.08, 0.92, size=count)
    return 2.0 * lat.omega1 * t + 2j * lat.tau * s


def test_anchor_validation(square):
    lat = square
    a2 = anchor_config(0.5 * lat.omega1, "gamma2", lat)
    assert a2.a.imag == 0.0
    a1 = anchor_config(lat.omega3 + 0.3, "gamma1", lat)
    assert a1.a.imag == pytest.approx(lat.tau)
    with pytest.raises(NonFinite):
        anchor_config(0.0, "gamma2", lat)
    with pytest.raises(NonFinite):
        anchor_config(0.3 + 0.1j, "gamma2", lat)  # off gamma1
    with pytest.raises(NonFinite):
        anchor_config(0.3, "gamma1", lat)  # gamma1 contour needs anchor on gamma2


def test_b1_two_forms_agree(square, anc):
    z = random_interior(square, 1000)
    a = anc.a
    # keep away from the switch neighbourhoods of +-a so the ratio form is used
    keep = (np.abs(z - a) > 0.05) & (np.abs(z + a - 2 * square.omega1) > 0.05)
    z = z[keep]
    ratio = b1_eval(z, anc, square)
    zform = b1_zeta_form(z, anc, square)
    assert np.all(np.abs(ratio - zform) <= 1e-9 * (1.0 + np.abs(ratio)))


def test_b1_special_values(square, anc):
    # a = omega1: b1 = -P'/(2(P - e1)) and b1(omega3) = 0
    z = random_interior(square, 50)
    expect = -0.5 * wp_prime(z, square) / (wp(z, square) - square.e1)
    got = b1_eval(z, anc, square)
    assert np.allclose(got, expect, rtol=1e-9, atol=1e-9)
    assert abs(b1_eval(square.omega3, anc, square)) < 1e-12


def test_b1_residues(square, anc):
    # simple poles with residue +1 at z = 0 and -1 at z = a (the torus residue
    # theorem forces the two to cancel)
    for eps in (1e-5, 1e-6):
        assert b1_eval(eps, anc, square) * eps == pytest.approx(1.0, abs=2e-4)
        assert b1_eval(anc.a + eps, anc, square) * eps == pytest.approx(-1.0, abs=2e-4)
    # Richardson on the two epsilons sharpens both limits
    r0 = [complex(b1_eval(e, anc, square) * e) for e in (1e-5, 1e-6)]
    assert (10 * r0[1] - r0[0]) / 9 == pytest.approx(1.0, abs=1e-7)
    ra = [complex(b1_eval(anc.a + e, anc, square) * e) for e in (1e-5, 1e-6)]
    assert (10 * ra[1] - ra[0]) / 9 == pytest.approx(-1.0, abs=1e-7)


def test_b1_parity_for_half_period_anchor(square, anc):
    z = random_interior(square, 100)
    keep = (np.abs(z - anc.a) > 0.05) & (np.abs(z + anc.a - 2 * square.omega1) > 0.05)
    z = z[keep]
    vals = b1_eval(z, anc, square)
    assert np.allclose(b1_eval(-z, anc, square), -vals, rtol=1e-9, atol=1e-10)


def test_basis_values_and_parity(square, anc):
    z = random_interior(square, 100)
    p = wp(z, square)
    dp = wp_prime(z, square)
    assert np.allclose(basis_eval(2, z, anc, square), p)
    assert np.allclose(basis_eval(4, z, anc, square), p**2)
    assert np.allclose(basis_eval(3, z, anc, square), -0.5 * dp)
    assert np.allclose(basis_eval(5, z, anc, square), -0.5 * dp * p)
    # parity with a = omega1: even j even, odd j odd
    for j in (2, 4):
        assert np.allclose(basis_eval(j, -z, anc, square), basis_eval(j, z, anc, square))
    for j in (3, 5):
        assert np.allclose(basis_eval(j, -z, anc, square), -basis_eval(j, z, anc, square))
    assert basis_eval(2, square.omega1, anc, square) == pytest.approx(square.e1)


def test_basis_double_periodicity(square, anc):
    z = random_interior(square, 60)
    for j in range(6):
        v = basis_eval(j, z, anc, square)
        for shift in (2.0 * square.omega1, 2j * square.tau):
            w = basis_eval(j, z + shift, anc, square)
            assert np.all(np.abs(w - v) <= 1e-10 * (1.0 + np.abs(v)))


def test_basis_reality_on_contours(square, anc):
    t = RNG.uniform(0.03, 0.97, 200)
    for offset in (0.0, 1j * square.tau):
        z = offset + 2 * square.omega1 * t
        z = z[np.abs(z) > 1e-2]
        z = z[np.abs(z - anc.a) > 1e-2]
        for j in range(6):
            v = basis_eval(j, z, anc, square)
            assert np.all(np.abs(v.imag) <= 1e-10 * (1.0 + np.abs(v)))


def test_basis_matrix_consistency(square, anc):
    z = random_interior(square, 40)
    mat = basis_matrix(7, z, anc, square)
    for j in range(8):
        assert np.allclose(mat[j], basis_eval(j, z, anc, square))


def test_basis_derivatives_fd(square, anc):
    z = random_interior(square, 30)
    keep = (np.abs(z - anc.a) > 0.1) & (np.abs(z + anc.a - 2 * square.omega1) > 0.1)
    z = z[keep]
    h = 1e-6
    for j in range(6):
        d1 = basis_deriv(j, z, anc, square, 1)
        fd1 = (basis_eval(j, z + h, anc, square) - basis_eval(j, z - h, anc, square)) / (2 * h)
        assert np.allclose(d1, fd1, rtol=1e-5, atol=1e-5)
        d2 = basis_deriv(j, z, anc, square, 2)
        fd2 = (basis_deriv(j, z + h, anc, square, 1) - basis_deriv(j, z - h, anc, square, 1)) / (2 * h)
        assert np.allclose(d2, fd2, rtol=1e-5, atol=1e-4)


def test_pole_errors(square, anc):
    with pytest.raises(PoleAt):
        basis_eval(1, 0.0, anc, square)
    with pytest.raises(PoleAt):
        basis_eval(1, anc.a, anc, square)
    with pytest.raises(PoleAt):
        basis_eval(2, 2 * square.omega1, anc, square)


def test_eval_apoly_examples(square, anc):
    ones = APolyCoeffs((1.0,), anc, square)
    z = random_interior(square, 20)
    assert np.allclose(eval_apoly(ones, z), 1.0)
    c01 = APolyCoeffs((0.0, 1.0), anc, square)
    assert abs(eval_apoly(c01, square.omega3)) < 1e-12
    c001 = APolyCoeffs((0.0, 0.0, 1.0), anc, square)
    assert eval_apoly(c001, square.omega3) == pytest.approx(square.e3)
    # linearity in coefficients
    c = APolyCoeffs((0.3, -0.7, 2.0), anc, square)
    direct = 0.3 - 0.7 * basis_eval(1, z, anc, square) + 2.0 * basis_eval(2, z, anc, square)
    assert np.allclose(eval_apoly(c, z), direct)


def test_eval_apoly_deriv(square, anc):
    c = APolyCoeffs((0.2, 1.1, -0.4, 0.9), anc, square)
    z = random_interior(square, 15)
    keep = (np.abs(z - anc.a) > 0.1) & (np.abs(z + anc.a - 2 * square.omega1) > 0.1)
    z = z[keep]
    h = 1e-6
    fd = (eval_apoly(c, z + h) - eval_apoly(c, z - h)) / (2 * h)
    assert np.allclose(eval_apoly_deriv(c, z, 1), fd, rtol=1e-5, atol=1e-5)


def test_has_pole_at_a(square, anc):
    assert not has_pole_at_a(APolyCoeffs((3.0, 0.0, 2.0), anc, square))
    assert has_pole_at_a(APolyCoeffs((0.0, 1.0), anc, square))
    assert not has_pole_at_a(APolyCoeffs((1.0, 1e-12, 1.0), anc, square))


def test_laurent_leading(square, anc):
    assert laurent_leading(APolyCoeffs((5.0,), anc, square)) == (0, 5.0)
    assert laurent_leading(APolyCoeffs((1.0, 0.0, 2.0), anc, square)) == (2, 2.0)
    deg, lead = laurent_leading(APolyCoeffs((0.0, 1.0), anc, square))
    assert (deg, lead) == (1, 1.0)
    with pytest.raises(ZeroFunction):
        laurent_leading(APolyCoeffs((0.0, 0.0), anc, square))


def test_laurent_leading_fit(square, anc):
    # b1 has residue 1 at 0: z * b1(z) -> 1
    c = APolyCoeffs((0.0, 1.0), anc, square)
    deg, lead = laurent_leading_fit(c)
    assert deg == 1
    assert lead == pytest.approx(1.0, abs=1e-4)
    c2 = APolyCoeffs((0.5, 0.0, 3.0), anc, square)
    deg2, lead2 = laurent_leading_fit(c2)
    assert deg2 == 2
    assert lead2 == pytest.approx(3.0, abs=1e-4)


def test_apoly_json_round_trip(square, anc):
    c = APolyCoeffs((0.5 + 0.1j, 1.0, -2.0), anc, square)
    back = apoly_from_dict(c.as_dict())
    assert back.lam == c.lam
    assert back.anchor.gamma == c.anchor.gamma
    assert back.lattice.omega1 == pytest.approx(square.omega1)
