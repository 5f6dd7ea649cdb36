import cmath
import math

import mpmath
import numpy as np
import pytest

from ptspectra.expansion import coefficient_table
from ptspectra.model import PotentialSpec, g_transform, omega_power
from ptspectra.sibuya import (
    balance_plan,
    connection_coefficient,
    f_at_point,
    f_k_at_point,
    wronskian,
    wronskian_asymptotic_check,
)


@pytest.mark.parametrize("m", [3, 4, 5])
@pytest.mark.parametrize("z", [1.0, 0.5 + 0.5j, 0.2])
def test_free_solution_is_bessel_k(m, z):
    # y'' = z^m y: f = sqrt(z) K_{1/(m+2)}(2 z^{(m+2)/2}/(m+2)) / sqrt(pi (m+2)/4)
    nu = mpmath.mpf(1) / (m + 2)
    x = 2 * mpmath.mpc(z) ** (mpmath.mpf(m + 2) / 2) / (m + 2)
    ref = complex(mpmath.sqrt(z) * mpmath.besselk(nu, x) / mpmath.sqrt(mpmath.pi * (m + 2) / 4))
    val = f_at_point(PotentialSpec(m, 1), 0.0, z).full()[0]
    assert abs(val - ref) <= 1e-12 * abs(ref)


def test_w01_normalization():
    for spec, lam in [(PotentialSpec(3, 1, (0.2, 0.1j, -0.3)), 2 + 1j),
                      (PotentialSpec(4, 1, (0.1, 0.3, -0.2j, 0.4)), -3 + 0.5j),
                      (PotentialSpec(6, 2, (0, 0.1, 0, 0.2, 0.1j, 0)), 4.0)]:
        w = wronskian(0, 1, spec, lam).full()
        assert abs(w / (2 * omega_power(spec.m, coefficient_table(spec).mu)) - 1) < 1e-9


def test_wronskian_independent_of_point():
    spec = PotentialSpec(3, 1, (0.2, 0.1j, -0.3))
    w0 = wronskian(-1, 1, spec, 2 + 1j, z=0.0).full()
    for z in (0.5, -0.3 + 0.4j):
        assert abs(wronskian(-1, 1, spec, 2 + 1j, z=z).full() / w0 - 1) < 1e-12


def test_shift_identity():
    spec = PotentialSpec(4, 1, (0.3, -0.1, 0.2j, 0.1))
    m, lam = 4, 1.5 - 2j
    lhs = wronskian(1, 3, spec, lam).full()
    rhs = omega_power(m, -1) * wronskian(0, 2, spec.with_a(g_transform(spec, 1)),
                                         omega_power(m, 2) * lam).full()
    assert abs(lhs / rhs - 1) < 1e-10


def test_connection_and_bilinear():
    spec = PotentialSpec(3, 1, (0.2, 0.1j, -0.3))
    C, Ct = connection_coefficient(0, spec, 3.0)
    assert abs(C - 1) < 1e-12 and abs(Ct) < 1e-12
    C, Ct = connection_coefficient(2, spec, 3.0)
    for j in (1, 2):
        lhs = wronskian(j, 2, spec, 3.0).full()
        rhs = C * wronskian(j, 0, spec, 3.0).full() + Ct * wronskian(j, -1, spec, 3.0).full()
        assert abs(lhs - rhs) < 1e-10 * max(1, abs(lhs))


def test_balanced_evaluation_matches_alternate_point():
    # at |lambda| ~ 500 the origin loses ~15 digits to cancellation; the
    # balanced point must agree with a displaced point on the same line
    spec = PotentialSpec(4, 1, (0.1, -0.2, 0.1, 0.3))
    lam = 500.0
    plan = balance_plan(spec, lam, -1, 1)
    assert plan.z != 0
    w = wronskian(-1, 1, spec, lam)
    sj = f_k_at_point(-1, spec, lam, 1.05 * plan.z, via=plan.via_j)
    sk = f_k_at_point(1, spec, lam, 1.05 * plan.z, via=plan.via_k)
    alt = cmath.log(sj.value * sk.derivative - sj.derivative * sk.value) + sj.log_scale + sk.log_scale
    assert abs(w.log() - alt) < 1e-9


def test_asymptotic_ratio_upper_and_lower():
    spec = PotentialSpec(3, 1, (0.1, 0.2, 0.3j))
    for ray in (math.pi / 2, -math.pi / 2):
        rows = wronskian_asymptotic_check(spec, [50, 800], ray)
        assert abs(rows[1][1] - 1) < abs(rows[0][1] - 1) < 0.05
