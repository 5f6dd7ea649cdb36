import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy

from ptspectra.errors import PoleError
from ptspectra.expansion import (
    K_constant,
    b_coefficients,
    beta,
    binom_half,
    c_coeffs,
    coefficient_table,
    d0_closed_form,
    d_coeffs,
    estimate_eigenvalue,
    eta,
    expansion_model,
    exponent,
    log_beta,
    spacing_estimate,
)
from ptspectra.model import PotentialSpec


def test_binom_half():
    assert binom_half(0) == 1
    assert binom_half(1) == Fraction(1, 2)
    assert binom_half(2) == Fraction(-1, 8)
    assert binom_half(3) == Fraction(1, 16)


@pytest.mark.parametrize("x,y", [(0.5, 4 / 3), (-0.3, 1.7), (-1.4, -0.2), (2.5, -1.75), (0.25, -0.6)])
def test_beta_against_mpmath(x, y):
    ref = float(mpmath.beta(x, y))
    assert beta(x, y) == pytest.approx(ref, rel=1e-13)
    la, s = log_beta(x, y)
    assert s == np.sign(ref)


@pytest.mark.parametrize("x,y", [(-1.0, 0.5), (0.5, -2.0), (1e-11, 1.0), (-0.5, -0.5)])
def test_beta_pole(x, y):
    with pytest.raises(PoleError):
        beta(x, y)


def test_b_coefficients_against_sympy():
    # b_{j,k}: coefficient of w^j in binom(1/2,k) (a_1 w + ... + a_m w^m)^k
    a = (Fraction(1, 3), Fraction(-2, 5), Fraction(3, 7))
    w = sympy.symbols("w")
    s = sum(sympy.Rational(x.numerator, x.denominator) * w ** (i + 1) for i, x in enumerate(a))
    jmax = 5
    exact = b_coefficients(a, jmax, exact=True)
    num = b_coefficients([float(x) for x in a], jmax)
    for k in range(jmax + 1):
        poly = sympy.expand(sympy.binomial(sympy.Rational(1, 2), k) * s ** k)
        for j in range(jmax + 1):
            ref = sympy.Rational(poly.coeff(w, j))
            assert exact[j, k] == Fraction(int(ref.p), int(ref.q))
            assert abs(num[j, k] - float(ref)) < 1e-15
    # row sums are the coefficients of sqrt(1 + s)
    ser = sympy.series(sympy.sqrt(1 + s), w, 0, jmax + 1).removeO()
    for j in range(jmax + 1):
        assert abs(num[j].sum() - float(ser.coeff(w, j))) < 1e-14


def test_b_structure():
    rng = np.random.default_rng(0)
    m = 4
    b = b_coefficients(rng.normal(size=m), m + 1)
    assert b[0, 0] == 1
    for j in range(1, m + 2):
        assert b[j, 0] == 0
        for k in range(m + 2):
            if j < k or k * m < j:
                assert b[j, k] == 0


def test_K_constant_generic_against_mpmath():
    for m, j, k in [(3, 2, 1), (3, 4, 2), (5, 3, 1), (4, 4, 2)]:
        ref = float(mpmath.beta(k - mpmath.mpf(j - 1) / m, mpmath.mpf(j - 1) / m - 0.5)) / m
        assert K_constant(m, j, k) == pytest.approx(ref, rel=1e-13)
    assert K_constant(3, 4, 1) == 0.0
    assert K_constant(3, 1, 1) == -2 / 3
    # log slot for even m
    assert K_constant(4, 3, 2) == pytest.approx(0.5 * (math.log(2) - 1), rel=1e-15)


def test_exponent_lattice():
    assert exponent(3, 0) == Fraction(5, 6)
    assert exponent(4, 3) == 0
    assert exponent(3, 5) == Fraction(-5, 6)


def test_c0_against_closed_form():
    # c_0 = B(1/2, 1 + 1/m) sin(ell pi / m) / pi, from an independent mpmath evaluation
    for m, ell in [(3, 1), (4, 1), (5, 2), (6, 1)]:
        ref = float(mpmath.beta(0.5, 1 + mpmath.mpf(1) / m) * mpmath.sin(ell * mpmath.pi / m) / mpmath.pi)
        assert c_coeffs(PotentialSpec(m, ell)).real[0] == pytest.approx(ref, rel=1e-14)
    assert c_coeffs(PotentialSpec(3, 1))[0].real == pytest.approx(0.46383810678557, abs=1e-13)


def test_d0_values():
    assert d0_closed_form(3, 1) == pytest.approx(2.51397115037048, abs=1e-12)
    model = expansion_model(PotentialSpec(4, 1, (0, 0.2, 0.1, -0.3)))
    assert d_coeffs(model)[0] == pytest.approx(d0_closed_form(4, 1), rel=1e-12)


def test_eta_and_nu():
    spec = PotentialSpec(4, 1, (0, 0.6, 0.2, 0))
    table = coefficient_table(spec)
    # nu = b_3 = a_3/2 - a_1 a_2/4 + a_1^3/16 with a_1 = 0
    assert table.nu == pytest.approx(0.1)
    assert table.mu == pytest.approx(1 - 0.1)
    assert eta(spec) == pytest.approx(2 * 0.1 / 4)
    assert eta(PotentialSpec(4, 3, (0, 0.6, 0.2, 0))) == pytest.approx(-2 * 0.1 / 4)
    assert eta(PotentialSpec(3, 1, (0.1, 0.2, 0.3))) == 0


def test_estimate_approaches_eigenvalues():
    # determinant zeros of the cubic (frozen from the determinant / oracle pair)
    model = expansion_model(PotentialSpec(3, 1))
    truth = {0: 1.1562670719881, 5: 19.451529130692, 10: 42.250405219213}
    gaps = [abs(estimate_eigenvalue(model, n) - lam) / lam for n, lam in truth.items()]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 2e-4
    assert spacing_estimate(model, 10) == pytest.approx(4.83, abs=0.01)


def test_estimate_solves_truncated_expansion():
    model = expansion_model(PotentialSpec(5, 2, (0, 0.1j, 0.2, -0.1, 0.05)))
    rs = [abs(model.residual(n, estimate_eigenvalue(model, n))) for n in (10, 40)]
    assert rs[1] < 1e-10 and rs[0] < 1e-10
