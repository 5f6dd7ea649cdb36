"""Phase function F(z, a) and the action L(a, lambda).

L is available in two independent forms: the regularised improper integral
of sqrt(t^m + P(t) + lambda) - t^{m/2} - ... over [0, inf), and the large
lambda series sum_j K_{m,j}(a) lambda^{1/2 + (1-j)/m} - (nu/m) log lambda.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import BranchError, PoleOnPath, QuadFail, SectorError
from .expansion import b_coefficients, coefficient_table
from .model import PotentialSpec

__all__ = ["ActionValue", "F_phase", "L_series", "L_quadrature", "cpow", "DEFAULT_DELTA"]

DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class ActionValue:
    value: complex
    truncation_order: object
    est_error: float


def cpow(lam: complex, s: float, arg: float | None = None) -> complex:
    """|lam|^s exp(i s arg), with arg defaulting to the principal argument."""
    r = abs(lam)
    th = cmath.phase(lam) if arg is None else arg
    return r ** s * cmath.exp(1j * s * th)


def F_phase(z: complex, spec: PotentialSpec) -> complex:
    """2/(m+2) z^{m/2+1} + sum_{1<=j<m/2+1} 2/(m+2-2j) b_j(a) z^{(m+2-2j)/2}."""
    z = complex(z)
    if z == 0:
        raise BranchError("F is evaluated away from the origin")
    if abs(cmath.phase(z) - math.pi) < 1e-12:
        raise BranchError("z lies on the branch cut arg z = pi")
    m = spec.m
    b_row = b_coefficients(spec.a, m + 1).sum(axis=1)
    out = 2 / (m + 2) * z ** ((m + 2) / 2)
    for j in range(1, m // 2 + 1 + (m % 2)):
        if 2 * j < m + 2:
            out += 2 / (m + 2 - 2 * j) * b_row[j] * z ** ((m + 2 - 2 * j) / 2)
    return out


def _check_sector(arg: float, delta: float):
    if abs(arg) > math.pi - delta:
        raise SectorError(f"|arg lambda| = {abs(arg):.4f} exceeds pi - {delta}")


def L_series(spec: PotentialSpec, lam: complex, jmax: int | None = None,
             arg: float | None = None, delta: float = DEFAULT_DELTA) -> ActionValue:
    """Truncated large-lambda series of L(a, lambda).

    ``arg`` overrides the argument used for every fractional power and the
    logarithm, so rotated arguments such as omega^{-2} lambda can be fed in
    with their continued (not principal) argument.
    """
    lam = complex(lam)
    m = spec.m
    jmax = m + 1 if jmax is None else jmax
    th = cmath.phase(lam) if arg is None else float(arg)
    _check_sector(th, delta)
    table = coefficient_table(spec, jmax)
    out = 0j
    for j in range(jmax + 1):
        out += table.K_row[j] * cpow(lam, 0.5 + (1 - j) / m, th)
    if m % 2 == 0:
        out -= table.nu / m * (math.log(abs(lam)) + 1j * th)
    est = abs(lam) ** ((m + 2 - 2 * (jmax + 1)) / (2 * m))
    return ActionValue(out, jmax, float(est))


def _sqrt_series_hat(a, lam, m, order):
    # coefficients of sqrt(1 + sum_i ahat_i t^{-i}) with ahat_m = a_m + lambda
    ahat = list(a)
    ahat[m - 1] = ahat[m - 1] + lam
    b = b_coefficients(ahat, order)
    return b.sum(axis=1)


def L_quadrature(spec: PotentialSpec, lam: complex, tol: float = 1e-9) -> ActionValue:
    """L(a, lambda) from the regularised integral over [0, inf)."""
    lam = complex(lam)
    m = spec.m
    a = np.asarray(spec.a, dtype=complex)
    coeffs = np.concatenate([[1.0], a])
    coeffs[-1] += lam  # descending coefficients of Q(t) = t^m + P(t) + lambda
    anorm = float(np.linalg.norm(a))
    T = max(4.0, (10 * (1 + anorm + abs(lam))) ** (1 / m) * 4)

    b_row = b_coefficients(spec.a, m + 1).sum(axis=1)
    jreg = m // 2 if m % 2 == 0 else (m + 1) // 2
    breg = b_row[m // 2 + 1] if m % 2 == 0 else 0.0

    # Reference phase of Q(t) on [0, T], unwrapped from the large-t end where
    # sqrt(Q) ~ +t^{m/2}; interpolated to pick the continuous branch anywhere.
    tg = np.linspace(0.0, T, 4097)
    qg = np.polyval(coeffs, tg)
    scale = np.maximum(1.0, tg ** m + abs(lam))
    if np.min(np.abs(qg) / scale) < 1e-3:
        i = int(np.argmin(np.abs(qg) / scale))
        lo, hi = tg[max(i - 1, 0)], tg[min(i + 1, len(tg) - 1)]
        res = optimize.minimize_scalar(lambda t: abs(np.polyval(coeffs, t)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-14})
        if abs(np.polyval(coeffs, res.x)) < 1e-8 * max(1.0, res.x ** m + abs(lam)):
            raise PoleOnPath(f"t^m + P(t) + lambda vanishes near t = {res.x:.6g}")
    ph = np.unwrap(np.angle(qg)[::-1])[::-1]
    ph += np.angle(qg[-1] / T ** m) - ph[-1]
    if np.max(np.abs(np.diff(ph))) > 0.5:
        raise QuadFail("phase of t^m + P(t) + lambda varies too fast on the sampling grid")
    if round((ph[0] - cmath.phase(coeffs[-1])) / (2 * np.pi)) % 2:
        raise BranchError("principal root at t = 0 does not continue to +t^{m/2} at infinity")

    def sqrtQ(t):
        q = np.polyval(coeffs, t)
        ref = np.interp(t, tg, ph)
        k = np.round((ref - np.angle(q)) / (2 * np.pi))
        return np.sqrt(np.abs(q)) * np.exp(0.5j * (np.angle(q) + 2 * np.pi * k))

    def integrand(t):
        out = sqrtQ(t) - t ** (m / 2)
        for j in range(1, jreg + 1):
            out -= b_row[j] * t ** (m / 2 - j)
        if m % 2 == 0:
            out -= breg / (t + 1)
        return out

    # split at the turning-point scale to help the adaptive rule
    knots = sorted({0.0, min(T, max(1.0, abs(lam) ** (1 / m))), T})
    total, err = 0j, 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        with warnings.catch_warnings():
            # identically-zero imaginary parts trip quadpack's divergence heuristic
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(integrand, lo, hi, complex_func=True, limit=400,
                                    epsabs=1e-13, epsrel=1e-13)
        total += val
        err += abs(e)

    # analytic tail: sqrt(Q) = t^{m/2} sum_j bhat_j t^{-j} for t >= T
    order = 6 * m + 60
    bhat = _sqrt_series_hat(spec.a, lam, m, order)
    tail = 0j
    last = 0.0
    for j in range(jreg + 1, order + 1):
        if m % 2 == 0 and j == m // 2 + 1:
            tail += bhat[j] * math.log1p(1 / T)
            continue
        term = bhat[j] * T ** (m / 2 - j + 1) / (j - m / 2 - 1)
        tail += term
        last = abs(term)
    err += 10 * last
    value = total + tail
    if err > tol * max(1.0, abs(value)):
        raise QuadFail(f"quadrature error estimate {err:.2e} exceeds tolerance")
    return ActionValue(complex(value), "quadrature", float(err))
