import math

import numpy as np
import pytest

from ptspectra.errors import ResolutionFail
from ptspectra.model import PotentialSpec
from ptspectra.oracle import (
    ContourGrid,
    collocation_spectrum,
    default_grid,
    ray_spectrum,
    refine_with_richardson,
    turning_points,
)


def _harmonic(z):
    return z * z


def test_harmonic_on_real_line():
    vals = ray_spectrum(_harmonic, 0.0, math.pi, 10.0, 3200, 6)
    assert np.allclose(vals, 2 * np.arange(6) + 1, atol=1e-8, rtol=0)


def test_harmonic_on_bent_contour():
    # rays anywhere inside the decaying sectors of z^2 give the same levels
    vals = ray_spectrum(_harmonic, 0.3, math.pi - 0.2, 10.0, 3200, 4)
    assert np.allclose(vals, 2 * np.arange(4) + 1, atol=1e-7, rtol=0)


@pytest.mark.parametrize("scheme", [2, 4])
def test_convergence_order(scheme):
    err = [abs(ray_spectrum(_harmonic, 0.0, math.pi, 10.0, N, 3, scheme)[2] - 5) for N in (800, 1600)]
    assert math.log2(err[0] / err[1]) == pytest.approx(scheme, abs=0.4)


def test_grid_validation():
    with pytest.raises(ValueError):
        ContourGrid(0.1, 3.0, 10.0, 100)
    with pytest.raises(ValueError):
        ContourGrid(0.1, 3.0, 10.0, 400, scheme=3)
    g = ContourGrid(0.1, 3.0, 10.0, 400)
    assert g.refined(2).N == 800 and g.rotated(0.1, 0.0).theta_plus == pytest.approx(0.2)


def test_resolution_guard():
    spec = PotentialSpec(3, 1)
    with pytest.raises(ResolutionFail):
        collocation_spectrum(spec, 30, ContourGrid(-0.3, math.pi + 0.3, 10.0, 200))


def test_turning_points_are_roots():
    spec = PotentialSpec(4, 1, (0.1, 0.2j, -0.3, 0.1))
    for z in turning_points(spec, 3 + 1j):
        assert abs(spec.potential(z) - (3 + 1j)) < 1e-10


def test_quartic_richardson_error_bar():
    spec = PotentialSpec(4, 2)
    g = default_grid(spec, 3, N=400)
    res = refine_with_richardson(spec, 3, [g, g.refined(2), g.refined(4)])
    assert res.monotone
    assert res.error[0] < 1e-8
    assert abs(res.records[0].lam - 1.0603620904841) < 1e-8


def test_cubic_rotation_invariance_and_reality():
    spec = PotentialSpec(3, 1)
    g = default_grid(spec, 6, N=1600)
    base = collocation_spectrum(spec, 6, g, check_resolution=False)
    turned = collocation_spectrum(spec, 6, g.rotated(0.02, -0.02), check_resolution=False)
    a = np.array([r.lam for r in base])
    b = np.array([r.lam for r in turned])
    assert np.max(np.abs(a - b)) < 1e-6
    assert np.all(a.real > 0) and np.all(np.abs(a.imag) < 1e-6 * np.abs(a))
    # level 5 from the spectral determinant
    assert abs(a[5] - 19.451529130692) < 1e-7 * 19.45


def test_richardson_grid_check():
    g = ContourGrid(0.1, 3.0, 10.0, 400)
    with pytest.raises(ValueError):
        refine_with_richardson(PotentialSpec(3, 1), 3, [g, g.refined(3)])
