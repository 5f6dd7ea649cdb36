"""Acceptance checks, one test per criterion (see conftest for the summary)."""

import cmath
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from ptspectra.action import L_quadrature, L_series
from ptspectra.expansion import (
    b_coefficients,
    c_coeffs,
    coefficient_table,
    d0_closed_form,
    d_coeffs,
    expansion_model,
)
from ptspectra.inverse import PTVerdict, classify_pt, fit_expansion, recover_potential
from ptspectra.model import PotentialSpec, g_transform, omega_power, translate
from ptspectra.oracle import default_grid, refine_with_richardson
from ptspectra.sibuya import f_at_origin, wronskian, wronskian_asymptotic_check
from ptspectra.spectrum import certify_completeness, find_eigenvalues, verify_expansion


def _random_a(rng, m, radius=1.0, real=False):
    z = rng.normal(size=m) + (0 if real else 1j * rng.normal(size=m))
    return tuple(z / np.linalg.norm(z) * radius * rng.uniform(0.0, 1.0))


def _sweep(seed=0, count=200):
    rng = np.random.default_rng(seed)
    for m in (3, 4, 5, 6):
        for ell in range(1, m):
            for _ in range(count):
                yield PotentialSpec(m, ell, _random_a(rng, m))


@pytest.mark.criterion(1)
def test_criterion_01_vanishing_slots():
    t0 = time.perf_counter()
    worst = 0.0
    for spec in _sweep():
        c = c_coeffs(spec)
        m = spec.m
        slots = [1, m + 1] + ([m // 2 + 1] if m % 2 == 0 else [])
        worst = max(worst, max(abs(c[j]) for j in slots))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12
    assert elapsed < 5.0, f"sweep took {elapsed:.2f} s"


@pytest.mark.criterion(2)
def test_criterion_02_g_covariance():
    worst = 0.0
    for spec in _sweep(seed=1):
        m, jmax = spec.m, spec.m + 1
        for ell in (spec.ell, Fraction(2 * spec.ell + 1, 2)):
            lhs = b_coefficients(g_transform(spec, ell), jmax)
            rhs = b_coefficients(spec.a, jmax)
            for j in range(jmax + 1):
                for k in range(j + 1):
                    if rhs[j, k] == 0:
                        assert lhs[j, k] == 0
                        continue
                    phase = omega_power(m, ((m + 2) * k - j) * Fraction(ell))
                    err = abs(lhs[j, k] - phase * rhs[j, k]) / abs(rhs[j, k])
                    worst = max(worst, err)
    assert worst <= 1e-12, worst


@pytest.mark.criterion(3)
@pytest.mark.parametrize("m,ell", [(3, 1), (3, 2), (4, 1), (4, 3), (5, 2), (6, 1)])
def test_criterion_03_d0_closed_form(m, ell):
    rng = np.random.default_rng(m * 10 + ell)
    for a in [(0,) * m, _random_a(rng, m)]:
        d = d_coeffs(expansion_model(PotentialSpec(m, ell, a)))
        closed = d0_closed_form(m, ell)
        assert abs(d[0] - closed) <= 1e-10 * closed


@pytest.mark.criterion(4)
@pytest.mark.parametrize("m", [3, 4])
def test_criterion_04_action_series_vs_quadrature(m):
    rng = np.random.default_rng(40 + m)
    rho = 0.5 + 1 / m
    mags = np.logspace(2, 4, 7)
    for arg in (0.0, math.pi / 3, -math.pi / 3):
        spec = PotentialSpec(m, 1, _random_a(rng, m))
        gaps, rel = [], None
        for r in mags:
            lam = r * cmath.exp(1j * arg)
            s = L_series(spec, lam).value
            q = L_quadrature(spec, lam).value
            gaps.append(abs(s - q))
            rel = abs(s - q) / abs(q)
        slope = np.polyfit(np.log(mags), np.log(gaps), 1)[0]
        assert abs(slope + rho) <= 0.15, (arg, slope, -rho)
        assert rel <= 1e-3


@pytest.mark.criterion(5)
def test_criterion_05_wronskian_identities():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst_norm = worst_shift = 0.0
    for i in range(50):
        m = 3 + i % 2
        spec = PotentialSpec(m, 1, tuple(0.5 * (rng.normal(size=m) + 1j * rng.normal(size=m))))
        lam = complex(5 * rng.normal(), 5 * rng.normal())
        w = wronskian(0, 1, spec, lam).full()
        target = 2 * omega_power(m, coefficient_table(spec).mu)
        worst_norm = max(worst_norm, abs(w / target - 1))
        k, j = (int(x) for x in rng.integers(-2, 3, size=2))
        if k == j:
            j = k + 1
        lhs = wronskian(k + 1, j + 1, spec, lam).full()
        rhs = omega_power(m, -1) * wronskian(k, j, spec.with_a(g_transform(spec, 1)),
                                             omega_power(m, 2) * lam).full()
        worst_shift = max(worst_shift, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    elapsed = time.perf_counter() - t0
    assert worst_norm <= 1e-6
    assert worst_shift <= 1e-6
    assert elapsed < 120


@pytest.mark.criterion(6)
@pytest.mark.parametrize("m", [3, 4])
def test_criterion_06_large_lambda_law(m):
    spec = PotentialSpec(m, 1, (0.3, -0.2j, 0.1, 0.2)[:m])
    for arg in (0.0, math.pi / 3, -math.pi / 3):
        lam = 1e3 * cmath.exp(1j * arg)
        f = f_at_origin(spec, lam)
        L = L_series(spec, lam).value
        q = 0.25 * cmath.log(lam)
        value = cmath.exp(cmath.log(f.value) + f.log_scale + q - L)
        slope = -cmath.exp(cmath.log(f.derivative) + f.log_scale - q - L)
        assert abs(value - 1) < 0.05
        assert abs(slope - 1) < 0.05


@pytest.mark.criterion(7)
@pytest.mark.parametrize("m,ell,lam0", [(3, 1, 1.156267), (4, 2, 1.060362)])
def test_criterion_07_oracle_cross_validation(m, ell, lam0):
    t0 = time.perf_counter()
    spec = PotentialSpec(m, ell)
    g = default_grid(spec, 10, N=800)
    orc = refine_with_richardson(spec, 10, [g, g.refined(2), g.refined(4)])
    det = find_eigenvalues(spec, 0, 9)
    o = np.array([r.lam for r in orc.records])
    d = np.array([r.lam for r in det])
    assert np.all(orc.error < 1e-7 * np.abs(o))
    assert np.max(np.abs(o - d) / np.abs(d)) < 1e-6
    assert abs(o[0] - lam0) < 5e-7
    assert np.all(np.abs(d.imag) < 1e-10 * np.abs(d)) and np.all(d.real > 0)
    assert time.perf_counter() - t0 < 300


def _c8_specs():
    rng = np.random.default_rng(8)
    return [
        PotentialSpec(3, 1),
        PotentialSpec(4, 1, tuple(rng.uniform(-0.5, 0.5, 4))),
        PotentialSpec(5, 2, tuple(rng.uniform(-0.4, 0.4, 5) + 1j * rng.uniform(-0.4, 0.4, 5))),
    ]


@pytest.mark.criterion(8)
@pytest.mark.parametrize("index", [0, 1, 2])
def test_criterion_08_residual_decay(index):
    spec = _c8_specs()[index]
    rho = 0.5 + 1 / spec.m
    recs = find_eigenvalues(spec, 0, 60, jobs=4)
    table = verify_expansion(recs, expansion_model(spec), (10, 60))
    assert abs(table.slope + rho) <= 0.15, (table.slope, -rho)


@pytest.mark.criterion(9)
def test_criterion_09_pt_realness():
    rng = np.random.default_rng(9)
    n_hi = 20
    for _ in range(5):
        spec = PotentialSpec(3, 1, _random_a(rng, 3, real=True))
        recs = find_eigenvalues(spec, 0, n_hi, jobs=4)
        for r in recs:
            if r.n >= 5:
                assert abs(r.lam.imag) <= 1e-8 * abs(r.lam), r
        r_out = 0.5 * (abs(recs[-1].lam) + abs(recs[-2].lam))
        listed = [r for r in recs if abs(r.lam) < r_out]
        assert certify_completeness(spec, recs, (0.0, r_out)) == len(listed)


@pytest.mark.criterion(10)
def test_criterion_10_translation_rigidity():
    spec = PotentialSpec(3, 1, (0.2, -0.4, 0.3))
    moved = spec.with_a(translate(spec, 0.3 + 0.1j))
    a = np.array([r.lam for r in find_eigenvalues(spec, 0, 20)])
    b = np.array([r.lam for r in find_eigenvalues(moved, 0, 20)])
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-6


@pytest.mark.criterion(11)
def test_criterion_11_inverse_round_trip():
    a_true = (0, 1 + 0.5j, -0.3)
    recs = find_eigenvalues(PotentialSpec(3, 1, a_true), 10, 59, jobs=4)
    assert len(recs) == 50
    rec = recover_potential(fit_expansion(recs, 3, 1, n_min=10))
    assert abs(rec.a[1] - a_true[1]) < 1e-2
    assert abs(rec.a[2] - a_true[2]) < 1e-2
    assert classify_pt(recs, 3, 1) is PTVerdict.NOT_PT
    real = find_eigenvalues(PotentialSpec(3, 1, (0, 1, -0.3)), 10, 59, jobs=4)
    assert classify_pt(real, 3, 1) is PTVerdict.PT_AFTER_TRANSLATION


@pytest.mark.criterion(12)
@pytest.mark.parametrize("ray", [math.pi / 2, -math.pi / 2])
def test_criterion_12_wronskian_ratio(ray):
    rows = wronskian_asymptotic_check(PotentialSpec(4, 2), [50, 200, 800], ray)
    dev = [abs(r - 1) for _, r in rows]
    assert dev[0] > dev[1] > dev[2]
    assert dev[2] < 0.05
