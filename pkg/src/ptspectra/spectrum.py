"""Spectral determinant, eigenvalue search, completeness certification and
residual checks of the large-n expansion."""

from __future__ import annotations

import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import NoConvergence, PhaseJump, SeedCollision, ShiftBreakdown
from .expansion import ExpansionModel, estimate_eigenvalue, expansion_model, exponent, spacing_estimate
from .model import PotentialSpec, g_transform, omega_power
from .sibuya import DEFAULT_CONFIG, IntegratorConfig, WronskianValue, wronskian

__all__ = [
    "EigenvalueRecord",
    "ResidualTable",
    "spectral_determinant",
    "muller",
    "find_eigenvalues",
    "winding_number",
    "certify_completeness",
    "zeros_in_disk",
    "verify_expansion",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigenvalueRecord:
    n: int
    lam: complex
    residual: float
    provenance: str = "determinant"
    error: float = 0.0


def spectral_determinant(spec: PotentialSpec, lam: complex,
                         cfg: IntegratorConfig = DEFAULT_CONFIG) -> WronskianValue:
    """Entire function of lambda whose zeros are the eigenvalues.

    Odd ell = 2s-1: W_{-s,s}(a, lambda).  Even ell = 2s:
    W_{-s,s+1}(G^{-1/2} a, omega^{-1} lambda).
    """
    ell = spec.ell
    if ell % 2:
        s = (ell + 1) // 2
        return wronskian(-s, s, spec, lam, cfg)
    s = ell // 2
    a_t = spec.with_a(g_transform(spec, Fraction(-1, 2)))
    return wronskian(-s, s + 1, a_t, omega_power(spec.m, -1) * complex(lam), cfg)


def _scaled(values):
    ref = max(v.log_scale for v in values)
    return [v.value * math.exp(v.log_scale - ref) for v in values]


def muller(fun, x0: complex, x1: complex, x2: complex, tol: float = 1e-10,
           maxiter: int = 80, max_step: float | None = None):
    """Muller iteration on a function returning WronskianValue.

    All three samples are rescaled to a common log-scale before each step;
    the iteration is invariant under a common factor, so magnitudes never
    need to be formed explicitly.  Returns (root, last value).
    """
    xs = [complex(x0), complex(x1), complex(x2)]
    fs = [fun(x) for x in xs]
    for _ in range(maxiter):
        f0, f1, f2 = _scaled(fs)
        x0, x1, x2 = xs
        if f2 == 0:
            return x2, fs[2]
        h1, h2 = x1 - x0, x2 - x1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        A = (d2 - d1) / (h2 + h1)
        B = A * h2 + d2
        disc = cmath.sqrt(B * B - 4 * A * f2)
        den = B + disc if abs(B + disc) >= abs(B - disc) else B - disc
        if den == 0:
            dx = 0.1 * (abs(h2) + 1e-12)
        else:
            dx = -2 * f2 / den
        if max_step is not None and abs(dx) > max_step:
            dx *= max_step / abs(dx)
        x3 = x2 + dx
        xs = [x1, x2, x3]
        fs = [fs[1], fs[2], fun(x3)]
        if abs(dx) <= tol * max(1.0, abs(x3)):
            return x3, fs[2]
    raise NoConvergence(f"Muller iteration did not converge near {xs[-1]}")


def _sort_key(lam):
    return (round(abs(lam), 12), cmath.phase(lam))


def _refine(spec, seed, step, cfg, tol):
    fun = lambda x: spectral_determinant(spec, x, cfg)  # noqa: E731
    root, val = muller(fun, seed - step, seed + step, seed, tol=tol, max_step=4 * step)
    return root, abs(val.value)


def _dedupe(roots):
    out = []
    collisions = []
    for r, res in roots:
        for i, (q, _) in enumerate(out):
            if abs(r - q) <= 1e-6 * max(abs(q), 1.0):
                collisions.append(r)
                break
        else:
            out.append((r, res))
    return out, collisions


def find_eigenvalues(spec: PotentialSpec, n_lo: int, n_hi: int,
                     cfg: IntegratorConfig = DEFAULT_CONFIG, tol: float = 1e-10,
                     jobs: int = 1, repair: bool = True, model: ExpansionModel | None = None):
    """Zeros of the spectral determinant for indices n_lo..n_hi.

    Each index is seeded from the expansion estimate and refined by Muller
    iteration.  When two seeds land on the same zero (or a seed fails), the
    neighbourhood is searched with the argument principle and the missing
    zeros are recovered from contour moments.
    """
    if n_hi < n_lo or n_lo < 0:
        raise ValueError("need 0 <= n_lo <= n_hi")
    model = expansion_model(spec) if model is None else model
    idx = list(range(n_lo, n_hi + 1))
    seeds = [estimate_eigenvalue(model, n) for n in idx]
    steps = [0.05 * spacing_estimate(model, n) for n in idx]

    def work(i):
        try:
            return _refine(spec, seeds[i], steps[i], cfg, tol)
        except NoConvergence:
            return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            found = list(ex.map(work, range(len(idx))))
    else:
        found = [work(i) for i in range(len(idx))]

    failed = [i for i, r in enumerate(found) if r is None]
    roots, collisions = _dedupe([r for r in found if r is not None])
    want = len(idx)
    if (collisions or failed) and repair:
        log.info("repairing %d collisions / %d failures", len(collisions), len(failed))
        centers = collisions + [seeds[i] for i in failed]
        for c in centers:
            n_near = int(np.argmin([abs(c - s) for s in seeds]))
            rad = 1.5 * spacing_estimate(model, idx[n_near])
            for z in zeros_in_disk(spec, c, rad, cfg):
                try:
                    r, res = _refine(spec, z, 1e-3 * rad, cfg, tol)
                except NoConvergence:
                    continue
                roots, _ = _dedupe(roots + [(r, res)])
    elif collisions or failed:
        raise SeedCollision(f"{len(collisions)} seeds collided and {len(failed)} failed")
    roots.sort(key=lambda t: _sort_key(t[0]))
    if len(roots) < want:
        raise SeedCollision(f"found {len(roots)} distinct zeros for {want} indices")
    roots = roots[:want]
    return [EigenvalueRecord(n, complex(r), float(res), "determinant")
            for n, (r, res) in zip(idx, roots)]


# -- argument principle ------------------------------------------------------

def _initial_samples(spec, center, radius):
    # Zeros lie about one level spacing apart, so the circle can pass within
    # half a spacing of one; the arc step must stay well below that or the
    # phase aliases by whole turns.  Level density from n ~ c_0 lambda^rho.
    m = spec.m
    rho = 0.5 + 1 / m
    c0 = abs(expansion_model(spec).c[0])
    r_far = abs(center) + radius
    spacing = 1.0 / (c0 * rho * max(r_far, 1.0) ** (rho - 1))
    arc = 0.2 * spacing
    return int(min(20000, max(96, math.ceil(2 * math.pi * radius / arc))))


def _circle_samples(spec, center, radius, cfg, n0=None, max_points=200_000):
    """Adaptively refined samples of log D on the circle |lambda - center| = radius.

    Returns (theta, logD) with the imaginary part unwrapped; consecutive
    samples differ by less than pi/4 in phase and 0.5 in log-modulus.
    """
    if n0 is None:
        n0 = _initial_samples(spec, center, radius)

    def logd(th):
        lam = center + radius * cmath.exp(1j * th)
        w = spectral_determinant(spec, lam, cfg)
        if w.value == 0:
            raise PhaseJump(f"determinant vanishes on the contour at {lam}")
        return complex(math.log(abs(w.value)) + w.log_scale, cmath.phase(w.value))

    th = list(np.linspace(0.0, 2 * math.pi, n0 + 1))
    vals = [logd(t) for t in th[:-1]]
    vals.append(vals[0])
    i = 0
    while i < len(th) - 1:
        d = vals[i + 1] - vals[i]
        dph = (d.imag + math.pi) % (2 * math.pi) - math.pi
        if abs(dph) > math.pi / 4 or abs(d.real) > 0.5:
            if th[i + 1] - th[i] < 1e-9 or len(th) > max_points:
                raise PhaseJump(f"phase unresolved near theta = {th[i]:.6g}; zero on contour?")
            tm = 0.5 * (th[i] + th[i + 1])
            th.insert(i + 1, tm)
            vals.insert(i + 1, logd(tm))
            continue
        i += 1
    th = np.array(th)
    vals = np.array(vals)
    dph = np.diff(vals.imag)
    dph = (dph + np.pi) % (2 * np.pi) - np.pi
    unwrapped = vals.imag[0] + np.concatenate([[0.0], np.cumsum(dph)])
    return th, vals.real + 1j * unwrapped


def winding_number(spec: PotentialSpec, radius: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                   center: complex = 0j) -> int:
    """Number of determinant zeros inside |lambda - center| < radius."""
    if radius <= 0:
        return 0
    _, ld = _circle_samples(spec, center, radius, cfg)
    total = (ld[-1].imag - ld[0].imag) / (2 * math.pi)
    k = int(round(total))
    if abs(total - k) > 1e-6:
        raise PhaseJump(f"non-integer winding {total:.6f}")
    return k


def zeros_in_disk(spec: PotentialSpec, center: complex, radius: float,
                  cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Approximate zeros inside a disk from the moments of d log D."""
    th, ld = _circle_samples(spec, center, radius, cfg)
    K = int(round((ld[-1].imag - ld[0].imag) / (2 * math.pi)))
    if K <= 0:
        return []
    z = radius * np.exp(1j * th)  # relative to center
    zm = 0.5 * (z[1:] + z[:-1])
    dl = np.diff(ld)
    s = [np.sum(zm ** p * dl) / (2j * math.pi) for p in range(1, K + 1)]
    # Newton identities: power sums -> elementary symmetric polynomials
    e = [1.0 + 0j]
    for k in range(1, K + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * s[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    poly = [(-1) ** k * e[k] for k in range(K + 1)]
    return [complex(center + r) for r in np.roots(poly)]


def certify_completeness(spec: PotentialSpec, records, annulus,
                         cfg: IntegratorConfig = DEFAULT_CONFIG) -> int:
    """Winding count of determinant zeros in r_in < |lambda| < r_out.

    A circle passing within 1e-4 r of a listed eigenvalue is moved outward
    by 1e-3 r.
    """
    lams = [r.lam for r in records]

    def clear(r):
        while r > 0 and any(abs(abs(l) - r) < 1e-4 * r for l in lams):
            r *= 1 + 1e-3
        return r

    r_in, r_out = (clear(float(annulus[0])), clear(float(annulus[1])))
    inner = winding_number(spec, r_in, cfg) if r_in > 0 else 0
    return winding_number(spec, r_out, cfg) - inner


# -- expansion residuals ------------------------------------------------------

@dataclass(frozen=True)
class ResidualTable:
    n: np.ndarray
    lam: np.ndarray
    residual: np.ndarray
    slope: float
    intercept: float
    n0: int
    window: tuple


def verify_expansion(records, model: ExpansionModel, window: tuple = (10, 60)) -> ResidualTable:
    """r_n = (n + 1/2) - sum_j c_j lambda_n^{e_j} - eta and a log-log decay fit."""
    recs = sorted(records, key=lambda r: r.n)
    n = np.array([r.n for r in recs])
    lam = np.array([r.lam for r in recs], dtype=complex)
    res = np.array([model.residual(k, l) for k, l in zip(n, lam)], dtype=complex)
    sel = (n >= window[0]) & (n <= window[1]) & (np.abs(res) > 0)
    if sel.sum() >= 2:
        slope, intercept = np.polyfit(np.log(np.abs(lam[sel])), np.log(np.abs(res[sel])), 1)
    else:
        slope, intercept = float("nan"), float("nan")
    mag = np.abs(res)
    n0 = int(n[-1]) if len(n) else 0
    for i in range(len(n) - 1, 0, -1):
        if mag[i] <= mag[i - 1] * 1.05 + 1e-13:
            n0 = int(n[i - 1])
        else:
            break
    return ResidualTable(n, lam, res, float(slope), float(intercept), n0, tuple(window))
