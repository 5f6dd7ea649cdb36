"""The Sibuya solution f(z, a, lambda) of v'' = (z^m + P(z) + lambda) v.

f is the solution decaying in the sector |arg z| < pi/(m+2), normalised by
f ~ z^{r_m} exp(-F(z)).  It is evaluated near the origin by integrating
inward from a large radius R on the positive real axis, where the start
data come from the asymptotic series of the logarithmic derivative
y = v'/v.  The series is carried far enough that the start data are
accurate to rounding, so the exact normalisation of f is inherited.

Magnitudes are tracked as (mantissa, log_scale) pairs: the true value is
mantissa * exp(log_scale).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numba
import numpy as np

from .action import DEFAULT_DELTA, L_series
from .errors import StepFail
from .expansion import coefficient_table
from .model import PotentialSpec, g_transform, omega_power

__all__ = [
    "IntegratorConfig",
    "SolutionSample",
    "WronskianValue",
    "f_at_point",
    "f_at_origin",
    "f_k_at_origin",
    "f_k_at_point",
    "propagate",
    "wronskian",
    "wronskian_from_samples",
    "connection_coefficient",
    "wronskian_asymptotic_check",
    "predicted_wronskian_log",
    "balance_point",
    "balance_plan",
    "BalancePlan",
]


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    order: Taylor order of the stepping scheme.
    init_tol: magnitude below which asymptotic-series terms count as negligible.
    accept_tol: fallback acceptance level for optimally truncated start data.
    start_radius: optional override of the start radius R.
    max_terms: length of the asymptotic series buffer.
    step_tol: local truncation target per Taylor step (relative).
    """

    order: int = 28
    init_tol: float = 1e-17
    accept_tol: float = 1e-13
    start_radius: float | None = None
    max_terms: int = 600
    step_tol: float = 1e-17
    max_steps: int = 2_000_000


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class SolutionSample:
    value: complex
    derivative: complex
    log_scale: float

    def full(self):
        s = math.exp(self.log_scale)
        return self.value * s, self.derivative * s


@dataclass(frozen=True)
class WronskianValue:
    value: complex
    log_scale: float
    pair: tuple

    def full(self) -> complex:
        return self.value * math.exp(self.log_scale)

    def log(self) -> complex:
        """Complex logarithm (principal branch of the mantissa)."""
        return cmath.log(self.value) + self.log_scale


# -- numba kernels -----------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _riccati_coeffs(q, m, K):
    # y = v'/v = sum_k c_k z^{(m-k)/2} solves y' + y^2 = Q with Q = sum q_i z^{m-i}
    c = np.zeros(K, dtype=np.complex128)
    c[0] = -1.0
    for n in range(1, K):
        s = 0j
        for i in range(1, n):
            s += c[i] * c[n - i]
        if n >= m + 2:
            k = n - m - 2
            s += c[k] * (m - k) / 2.0
        qn = 0j
        if n % 2 == 0 and n // 2 <= m:
            qn = q[n // 2]
        c[n] = (s - qn) / 2.0
    return c


@numba.njit(cache=True, nogil=True)
def _start_data(q, m, R, K, tol, accept):
    """log f(R) and y(R) from the asymptotic series.

    The integration constant of log f vanishes by the normalisation of f.
    Terms are summed until a window of 2m+4 consecutive terms is below
    ``tol``; failing that, the series is cut where that window is smallest.
    """
    c = _riccati_coeffs(q, m, K)
    logR = math.log(R)
    lt = np.zeros(K, dtype=np.complex128)
    yt = np.zeros(K, dtype=np.complex128)
    size = np.zeros(K)
    for k in range(K):
        p = (m - k) / 2.0
        yt[k] = c[k] * R ** p
        if k == m + 2:
            lt[k] = c[k] * logR
        else:
            lt[k] = c[k] * R ** (p + 1.0) / (p + 1.0)
        size[k] = max(abs(lt[k]), abs(yt[k]) / R ** (m / 2.0))
    win = 2 * m + 4
    cut = K
    best = 1e300
    best_cut = K
    for k in range(m + 3 + win, K):
        wmax = 0.0
        for i in range(k - win, k):
            wmax = max(wmax, size[i])
        if wmax < best:
            best = wmax
            best_cut = k - win
        if wmax < tol:
            cut = k - win
            break
    conv = True
    if cut == K:
        cut = best_cut
        conv = best < accept
    logf = 0j
    y = 0j
    for k in range(cut):
        logf += lt[k]
        y += yt[k]
    return logf, y, conv


@numba.njit(cache=True, nogil=True)
def _taylor_integrate(q, m, z0, z1, v, dv, order, tol, max_steps):
    """Integrate v'' = Q v on the segment z0 -> z1 by Taylor stepping.

    Returns the renormalised (v, dv), the accumulated log-scale, the step
    count and a success flag.
    """
    logscale = 0.0
    length = abs(z1 - z0)
    if length == 0.0:
        return v, dv, logscale, 0, True
    direction = (z1 - z0) / length
    s = 0.0
    t = np.zeros(order + 1, dtype=np.complex128)
    tmp = np.empty(m + 1, dtype=np.complex128)
    asc = np.zeros(m + 1, dtype=np.complex128)
    nsteps = 0
    while s < length:
        z = z0 + direction * s
        # Taylor coefficients of Q about z by repeated Horner deflation
        for i in range(m + 1):
            tmp[i] = q[i]
        for k in range(m + 1):
            acc = tmp[0]
            for i in range(1, m + 1 - k):
                acc = acc * z + tmp[i]
                tmp[i] = acc
            asc[k] = acc * direction ** (k + 2)
        t[0] = v
        t[1] = dv * direction
        for n in range(order - 1):
            acc = 0j
            for i in range(min(n, m) + 1):
                acc += asc[i] * t[n - i]
            t[n + 2] = acc / ((n + 1) * (n + 2))
        kq = math.sqrt(max(1.0, abs(asc[0])))
        nrm = max(abs(t[0]), abs(t[1]) / kq)
        h = 2.5 / kq
        e1 = abs(t[order - 1]) / nrm
        e2 = abs(t[order]) / nrm
        if e1 > 0:
            h = min(h, (tol / e1) ** (1.0 / (order - 1)))
        if e2 > 0:
            h = min(h, (tol / e2) ** (1.0 / order))
        if s + h > length:
            h = length - s
        if h <= 1e-14 * length or nsteps >= max_steps:
            return v, dv, logscale, nsteps, False
        vv = 0j
        dd = 0j
        hp = 1.0
        for n in range(order + 1):
            vv += t[n] * hp
            if n < order:
                dd += (n + 1) * t[n + 1] * hp
            hp *= h
        v = vv
        dv = dd / direction
        sc = max(abs(v), abs(dv))
        v /= sc
        dv /= sc
        logscale += math.log(sc)
        s += h
        nsteps += 1
    return v, dv, logscale, nsteps, True


# -- python layer ------------------------------------------------------------

def _q_coeffs(a, lam, m):
    q = np.zeros(m + 1, dtype=np.complex128)
    q[0] = 1.0
    q[1:m] = np.asarray(a, dtype=complex)[: m - 1]
    q[m] = complex(a[m - 1]) + complex(lam)
    return q


def _start_radius(q, m, cfg):
    if cfg.start_radius is not None:
        return float(cfg.start_radius)
    s = max([1.0, abs(q[m]) ** (1 / m)] + [abs(q[j]) ** (1 / j) for j in range(1, m)])
    return max(2.5 * s, (25.0 * (m + 2)) ** (2 / (m + 2)))


def _solve(a, lam, m, path, cfg):
    """(f, f') at path[-1], integrating from the start radius through ``path``."""
    q = _q_coeffs(a, lam, m)
    R = _start_radius(q, m, cfg)
    for _ in range(8):
        logf, y, conv = _start_data(q, m, R, cfg.max_terms, cfg.init_tol, cfg.accept_tol)
        if conv:
            break
        R *= 1.5
    else:
        raise StepFail("asymptotic start data did not converge at any trial radius")
    v, dv = 1.0 + 0j, complex(y)
    sc = max(1.0, abs(dv))
    v, dv = v / sc, dv / sc
    log_scale = logf.real + math.log(sc)
    z = complex(R)
    for p in path:
        v, dv, ls, _, ok = _taylor_integrate(q, m, z, complex(p), v, dv,
                                             cfg.order, cfg.step_tol, cfg.max_steps)
        if not ok:
            raise StepFail(f"Taylor integrator stalled (m={m}, lambda={lam})")
        log_scale += ls
        z = complex(p)
    # fold the phase of exp(logf) into the mantissa
    ph = cmath.exp(1j * logf.imag)
    return SolutionSample(complex(v * ph), complex(dv * ph), float(log_scale))


def f_at_point(spec: PotentialSpec, lam: complex, z: complex,
               cfg: IntegratorConfig = DEFAULT_CONFIG, via=()) -> SolutionSample:
    """(f, f') at z, reached from the start radius through the points ``via``."""
    return _solve(spec.a, lam, spec.m, list(via) + [z], cfg)


def f_at_origin(spec: PotentialSpec, lam: complex,
                cfg: IntegratorConfig = DEFAULT_CONFIG) -> SolutionSample:
    return _solve(spec.a, lam, spec.m, [0j], cfg)


def f_k_at_point(k: int, spec: PotentialSpec, lam: complex, z: complex = 0j,
                 cfg: IntegratorConfig = DEFAULT_CONFIG, via=()) -> SolutionSample:
    """f_k(z) = f(omega^{-k} z, G^k a, omega^{2k} lambda) and its z-derivative.

    ``via`` lists intermediate path points in the z-plane of f_k.
    """
    m = spec.m
    ak = g_transform(spec, k)
    lam_k = omega_power(m, 2 * k) * complex(lam)
    rot = omega_power(m, -k)
    path = [rot * complex(p) for p in via] + [rot * complex(z)]
    s = _solve(ak, lam_k, m, path, cfg)
    return SolutionSample(s.value, rot * s.derivative, s.log_scale)


def f_k_at_origin(k: int, spec: PotentialSpec, lam: complex,
                  cfg: IntegratorConfig = DEFAULT_CONFIG) -> SolutionSample:
    return f_k_at_point(k, spec, lam, 0j, cfg)


def propagate(spec: PotentialSpec, lam: complex, sample: SolutionSample,
              z_start: complex, z_end: complex,
              cfg: IntegratorConfig = DEFAULT_CONFIG) -> SolutionSample:
    """Continue a solution of v'' = (z^m + P + lambda) v along a segment."""
    q = _q_coeffs(spec.a, lam, spec.m)
    v, dv, ls, _, ok = _taylor_integrate(q, spec.m, complex(z_start), complex(z_end),
                                         complex(sample.value), complex(sample.derivative),
                                         cfg.order, cfg.step_tol, cfg.max_steps)
    if not ok:
        raise StepFail("Taylor integrator stalled while propagating")
    return SolutionSample(complex(v), complex(dv), sample.log_scale + ls)


def _sqrt_continuous(q, path):
    """sqrt(Q) along a polyline, with the branch continued sample to sample."""
    vals = np.sqrt(np.polyval(q, path))
    flip = np.abs(vals[1:] + vals[:-1]) < np.abs(vals[1:] - vals[:-1])
    sign = np.cumprod(np.concatenate([[1.0], np.where(flip, -1.0, 1.0)]))
    return vals * sign


def _re_phase_along(q, zt, u, x):
    """Re int_{zt}^{x u} sqrt(Q) dz for a grid x >= 0 (path zt -> 0 -> x u)."""
    sg = np.linspace(0.0, 1.0, 400)
    path = np.concatenate([zt * (1 - sg ** 2), x[1:] * u])
    r = _sqrt_continuous(q, path)
    phi0 = np.trapezoid(r[:400] * (-zt * 2 * sg), sg)
    g = r[399:] * u
    phi = phi0 + np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(x))])
    return phi.real


@dataclass(frozen=True)
class BalancePlan:
    """Evaluation point z and per-solution waypoints for one W_{j,k}."""

    z: complex
    via_j: tuple
    via_k: tuple


def balance_plan(spec: PotentialSpec, lam: complex, j: int, k: int,
                 npts: int = 4000) -> BalancePlan:
    """Where to evaluate W_{j,k} so that it does not cancel.

    For large |lambda| the products f_j f_k' at the origin can exceed
    W_{j,k} by a factor exp(2 |Re int_{z_t}^0 sqrt(Q)|), z_t a turning point
    adjacent to the path joining S_j and S_k.  The evaluation point is
    moved onto the line bisecting the two sectors (on the side of the
    shorter connecting path) where that exponent vanishes, i.e. onto the
    anti-Stokes line joining the two adjacent turning points.  Each
    solution is integrated through its own turning point on the way.
    """
    m = spec.m
    lam = complex(lam)
    origin = BalancePlan(0j, (), ())
    if abs(lam) ** (0.5 + 1 / m) < 8.0:
        return origin
    sep = 2 * math.pi * abs(k - j) / (m + 2)
    if abs(sep - math.pi) < 1e-12:
        return origin
    theta = math.pi * (j + k) / (m + 2)
    short = sep < math.pi
    if not short:
        theta += math.pi
    u = cmath.exp(1j * theta)
    q = _q_coeffs(spec.a, lam, m)
    roots = np.roots(q)
    rel = np.angle(roots / u)
    # for even ell one turning point sits on the bisector itself; the pair
    # that bounds the anti-Stokes line lies on either side of it
    tol = 0.5 * math.pi / m
    above = [r for r, t in zip(roots, rel) if t > tol]
    below = [r for r, t in zip(roots, rel) if t < -tol]
    if not above or not below:
        return origin
    z_up = min(above, key=lambda r: abs(cmath.phase(r / u)))
    z_dn = min(below, key=lambda r: abs(cmath.phase(r / u)))
    x = np.linspace(0.0, 1.5 * float(np.max(np.abs(roots))), npts)
    cross = []
    worst0 = 0.0
    for zt in (z_up, z_dn):
        re = _re_phase_along(q, zt, u, x)
        worst0 = max(worst0, abs(re[0]))
        idx = np.nonzero(np.sign(re[1:]) != np.sign(re[:-1]))[0]
        if len(idx) == 0:
            return origin
        i = idx[0]
        cross.append(x[i] - re[i] * (x[i + 1] - x[i]) / (re[i + 1] - re[i]))
    if worst0 < 3.0:
        return origin
    z = 0.5 * (cross[0] + cross[1]) * u
    tp_j, tp_k = (z_dn, z_up) if short else (z_up, z_dn)
    return BalancePlan(complex(z), (complex(tp_j),), (complex(tp_k),))


def balance_point(spec: PotentialSpec, lam: complex, j: int, k: int) -> complex:
    return balance_plan(spec, lam, j, k).z


def wronskian_from_samples(sj: SolutionSample, sk: SolutionSample, pair=(None, None)) -> WronskianValue:
    val = sj.value * sk.derivative - sj.derivative * sk.value
    return WronskianValue(complex(val), sj.log_scale + sk.log_scale, tuple(pair))


def wronskian(j: int, k: int, spec: PotentialSpec, lam: complex,
              cfg: IntegratorConfig = DEFAULT_CONFIG, z: complex | None = None) -> WronskianValue:
    """W_{j,k} = f_j f_k' - f_j' f_k.

    W is independent of the evaluation point.  With ``z=None`` the point
    and integration paths come from :func:`balance_plan`; an explicit ``z``
    uses straight paths from the start radius.
    """
    if z is None:
        plan = balance_plan(spec, lam, j, k)
    else:
        plan = BalancePlan(complex(z), (), ())
    sj = f_k_at_point(j, spec, lam, plan.z, cfg, plan.via_j)
    sk = f_k_at_point(k, spec, lam, plan.z, cfg, plan.via_k)
    return wronskian_from_samples(sj, sk, (j, k))


def _ratio(num: WronskianValue, den: WronskianValue) -> complex:
    return num.value / den.value * math.exp(num.log_scale - den.log_scale)


def connection_coefficient(k: int, spec: PotentialSpec, lam: complex,
                           cfg: IntegratorConfig = DEFAULT_CONFIG):
    """(C_k, C~_k) with f_k = C_k f_0 + C~_k f_{-1}."""
    s = {i: f_k_at_origin(i, spec, lam, cfg) for i in {k, 0, -1}}
    w_m10 = wronskian_from_samples(s[-1], s[0], (-1, 0))
    w_km1 = wronskian_from_samples(s[k], s[-1], (k, -1))
    w_k0 = wronskian_from_samples(s[k], s[0], (k, 0))
    return -_ratio(w_km1, w_m10), _ratio(w_k0, w_m10)


# -- large-lambda asymptotics of W_{-1,1} -------------------------------------

def _L(spec, a, lam, shift):
    """L(a, omega^shift lambda) with the rotated argument continued."""
    m = spec.m
    arg = cmath.phase(lam) + 2 * math.pi * shift / (m + 2)
    lam_rot = omega_power(m, shift) * lam
    return L_series(spec.with_a(a), lam_rot, arg=arg).value


def _log_terms_upper(spec, lam):
    """[(log prefactor, exponent)] of the dominant terms, upper half-plane."""
    m = spec.m
    mu = coefficient_table(spec).mu
    L0 = L_series(spec, lam).value
    if m >= 4:
        return [(cmath.log(2 * omega_power(m, 0.5) * cmath.exp(2j * math.pi * mu / (m + 2))),
                 _L(spec, g_transform(spec, -1), lam, -2) - L0)]
    w = cmath.exp(2j * math.pi / 5)
    return [(cmath.log(-2 * w ** -1.25), _L(spec, g_transform(spec, 4), lam, -2) - L0),
            (cmath.log(-2j * w ** 2.5), -_L(spec, g_transform(spec, 2), lam, -1) - L0)]


def _log_terms_lower(spec, lam):
    m = spec.m
    tab = coefficient_table(spec)
    L0 = L_series(spec, lam).value
    pref = 2 * omega_power(m, 0.5) * cmath.exp(2j * math.pi * (tab.mu + 2 * tab.nu) / (m + 2))
    return [(cmath.log(pref), _L(spec, g_transform(spec, 1), lam, 2) - L0)]


def _logsumexp(terms):
    logs = [p + e for p, e in terms]
    top = max(logs, key=lambda x: x.real)
    return top + cmath.log(sum(cmath.exp(x - top) for x in logs))


def predicted_wronskian_log(spec: PotentialSpec, lam: complex, delta: float = DEFAULT_DELTA) -> complex:
    """Complex log of the leading large-lambda form of W_{-1,1}(a, lambda).

    m >= 4 uses the single dominant term in each half-plane; m = 3 uses the
    two-term form valid for -delta <= arg lambda <= pi - delta, and the
    lower half-plane is reached through W_{-1,1}(conj a, conj lambda)
    = -conj W_{-1,1}(a, lambda).
    """
    lam = complex(lam)
    th = cmath.phase(lam)
    if spec.m >= 4:
        if delta <= th <= math.pi - delta:
            return _logsumexp(_log_terms_upper(spec, lam))
        if -math.pi + delta <= th <= -delta:
            return _logsumexp(_log_terms_lower(spec, lam))
        raise ValueError("arg lambda must avoid the real axis by delta for m >= 4")
    if -delta <= th <= math.pi - delta:
        return _logsumexp(_log_terms_upper(spec, lam))
    conj_spec = spec.with_a(np.conjugate(spec.a))
    val = _logsumexp(_log_terms_upper(conj_spec, lam.conjugate()))
    return (val + 1j * math.pi).conjugate()


def wronskian_asymptotic_check(spec: PotentialSpec, lambda_magnitudes, ray: float,
                               cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Rows (|lambda|, ratio) with ratio = W_{-1,1} / predicted leading form."""
    rows = []
    for r in lambda_magnitudes:
        lam = r * cmath.exp(1j * ray)
        w = wronskian(-1, 1, spec, lam, cfg)
        ratio = cmath.exp(w.log() - predicted_wronskian_log(spec, lam))
        rows.append((float(r), complex(ratio)))
    return rows
