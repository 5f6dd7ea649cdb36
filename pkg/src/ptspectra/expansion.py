"""Coefficient objects of the eigenvalue expansion.

Given P(z) = a_1 z^{m-1} + ... + a_m:

* b_{j,k}(a): coefficient of z^{-j} in binom(1/2, k) (a_1/z + ... + a_m/z^m)^k,
  so that sqrt(1 + a_1/z + ...) = sum_j b_j z^{-j} with b_j = sum_k b_{j,k}.
* K_{m,j,k}: Beta-function constants of the action expansion.
* c_{ell,j}, eta_ell: coefficients of
  n + 1/2 = sum_j c_{ell,j} lambda^{1/2 + (1-j)/m} + eta_ell + O(lambda^{-rho}).
* d_{ell,j}: the same relation reverted,
  lambda_n = sum_j d_{ell,j} (n + 1/2)^{(2m - 2j)/(m+2)}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateLeadError, NoConvergence, PoleError
from .model import PotentialSpec

__all__ = [
    "log_beta",
    "binom_half",
    "b_coefficients",
    "build_b_table",
    "K_constant",
    "CoefficientTable",
    "coefficient_table",
    "c_coeffs",
    "eta",
    "ExpansionModel",
    "expansion_model",
    "d_coeffs",
    "d0_closed_form",
    "estimate_eigenvalue",
    "spacing_estimate",
    "exponent",
]

_POLE_TOL = 1e-9


def _near_pole(x: float) -> bool:
    return x <= _POLE_TOL and abs(x - round(x)) < _POLE_TOL


def _lgamma_signed(x: float):
    # math.lgamma already returns log|Gamma| for negative non-integers
    if x > 0:
        return math.lgamma(x), 1
    sign = -1 if math.ceil(-x) % 2 else 1
    return math.lgamma(x), sign


def log_beta(x: float, y: float):
    """Return (log|B(x, y)|, sign of B(x, y)) for real x, y."""
    x, y = float(x), float(y)
    for v in (x, y, x + y):
        if _near_pole(v):
            raise PoleError(f"Beta({x}, {y}) has a Gamma pole at {v}")
    lx, sx = _lgamma_signed(x)
    ly, sy = _lgamma_signed(y)
    lxy, sxy = _lgamma_signed(x + y)
    return lx + ly - lxy, sx * sy * sxy


def beta(x: float, y: float) -> float:
    la, s = log_beta(x, y)
    return s * math.exp(la)


def binom_half(k: int) -> Fraction:
    """Generalised binomial coefficient binom(1/2, k), exactly."""
    out = Fraction(1)
    for i in range(k):
        out *= (Fraction(1, 2) - i) / (i + 1)
    return out


def b_coefficients(a, jmax: int, exact: bool = False):
    """Matrix b[j, k] = b_{j,k}(a) for 0 <= k <= j <= jmax.

    ``a`` is the raw sequence (a_1, ..., a_m). With ``exact=True`` the
    arithmetic is carried out on the entries of ``a`` as given (e.g.
    Fractions), with exact binomials; otherwise complex floating point.
    """
    m = len(a)
    if exact:
        zero = Fraction(0)
        series = [zero] * (jmax + 1)
        for i in range(1, min(m, jmax) + 1):
            series[i] = a[i - 1]
        b = np.full((jmax + 1, jmax + 1), zero, dtype=object)
        power = [Fraction(1)] + [zero] * jmax
        for k in range(jmax + 1):
            ck = binom_half(k)
            for j in range(jmax + 1):
                b[j, k] = ck * power[j]
            nxt = [zero] * (jmax + 1)
            for p in range(jmax + 1):
                if power[p] == 0:
                    continue
                for i in range(1, jmax + 1 - p):
                    nxt[p + i] += power[p] * series[i]
            power = nxt
        return b
    series = np.zeros(jmax + 1, dtype=complex)
    n = min(m, jmax)
    series[1:n + 1] = np.asarray(a, dtype=complex)[:n]
    b = np.zeros((jmax + 1, jmax + 1), dtype=complex)
    power = np.zeros(jmax + 1, dtype=complex)
    power[0] = 1.0
    for k in range(jmax + 1):
        b[:, k] = float(binom_half(k)) * power
        power = np.convolve(power, series)[: jmax + 1]
    return b


def build_b_table(spec: PotentialSpec, jmax: int | None = None, exact: bool = False):
    """b_{j,k} matrix for ``spec`` (j, k up to ``jmax``, default m+1)."""
    jmax = spec.m + 1 if jmax is None else jmax
    return b_coefficients(spec.a, jmax, exact=exact)


def K_constant(m: int, j: int, k: int) -> float:
    """K_{m,j,k}, with branch precedence j=k=0, j=k=1, j=m/2+1, generic."""
    if not 0 <= k <= j:
        raise ValueError(f"need 0 <= k <= j, got j={j}, k={k}")
    if j == 0 and k == 0:
        return beta(0.5, 1 + 1 / m) / (2 * math.cos(math.pi / m))
    if j == 1 and k == 1:
        return -2.0 / m
    if k * m < j:
        return 0.0
    if m % 2 == 0 and j == m // 2 + 1:
        return (2.0 / m) * (math.log(2.0) - sum(1.0 / (2 * s - 1) for s in range(1, k)))
    return beta(k - (j - 1) / m, (j - 1) / m - 0.5) / m


def exponent(m: int, j: int) -> Fraction:
    """Exponent 1/2 + (1 - j)/m = (m + 2 - 2j)/(2m) of lambda in slot j."""
    return Fraction(m + 2 - 2 * j, 2 * m)


@dataclass(frozen=True)
class CoefficientTable:
    m: int
    jmax: int
    b: np.ndarray
    b_row: np.ndarray
    nu: complex
    mu: complex
    r_m: complex
    K: np.ndarray
    K_row: np.ndarray


def _nu_from_b_row(m, b_row):
    if m % 2:
        return 0j
    return complex(b_row[m // 2 + 1])


def coefficient_table(spec: PotentialSpec, jmax: int | None = None) -> CoefficientTable:
    m = spec.m
    jmax = m + 1 if jmax is None else jmax
    b = build_b_table(spec, max(jmax, m // 2 + 1))
    b_row = b.sum(axis=1)
    nu = _nu_from_b_row(m, b_row)
    K = np.zeros((jmax + 1, jmax + 1))
    for j in range(jmax + 1):
        for k in range(j + 1):
            K[j, k] = K_constant(m, j, k)
    K_row = (K * b[: jmax + 1, : jmax + 1]).sum(axis=1)
    return CoefficientTable(
        m=m, jmax=jmax, b=b[: jmax + 1, : jmax + 1], b_row=b_row[: jmax + 1],
        nu=nu, mu=m / 4 - nu, r_m=-m / 4 - nu, K=K, K_row=K_row,
    )


def _sin_pi(r: Fraction) -> float:
    if r.denominator == 1:
        return 0.0
    return math.sin(math.pi * r)


def _cos_pi(r: Fraction) -> float:
    if (r - Fraction(1, 2)).denominator == 1:
        return 0.0
    return math.cos(math.pi * r)


def c_coeffs(spec: PotentialSpec, table: CoefficientTable | None = None) -> np.ndarray:
    """c_{ell,j}(a) for j = 0..m+1."""
    m, ell = spec.m, spec.ell
    table = coefficient_table(spec) if table is None else table
    c = np.zeros(m + 2, dtype=complex)
    for j in range(m + 2):
        trig = _sin_pi(Fraction((j - 1) * ell, m)) * _cos_pi(Fraction(j - 1, m))
        if trig == 0.0:
            continue
        signs = np.array([(-1) ** ((ell + 1) * k) for k in range(j + 1)])
        s = np.sum(signs * table.K[j, : j + 1] * table.b[j, : j + 1])
        c[j] = -(2 / math.pi) * s * trig
    return c


def eta(spec: PotentialSpec, table: CoefficientTable | None = None) -> complex:
    """eta_ell(a) = (-1)^{(ell-1)/2} 2 nu(a)/m for odd ell, else 0."""
    if spec.ell % 2 == 0 or spec.m % 2:
        return 0j
    table = coefficient_table(spec) if table is None else table
    return (-1) ** ((spec.ell - 1) // 2) * 2 * table.nu / spec.m


def d0_closed_form(m: int, ell: int) -> float:
    """(pi^{-1} B(1/2, 1 + 1/m) sin(ell pi/m))^{-2m/(m+2)}."""
    return (beta(0.5, 1 + 1 / m) * math.sin(ell * math.pi / m) / math.pi) ** (-2 * m / (m + 2))


# -- truncated power series helpers (coefficient arrays, index = degree) ------

def _ps_mul(x, y):
    return np.convolve(x, y)[: len(x)]


def _ps_pow(x, alpha):
    """x^alpha for a series with x[0] != 0 (principal branch of x[0]^alpha)."""
    n = len(x)
    p = np.zeros(n, dtype=complex)
    p[0] = complex(x[0]) ** alpha
    for k in range(1, n):
        i = np.arange(1, k + 1)
        p[k] = np.sum((alpha * i - (k - i)) * x[i] * p[k - i]) / (k * x[0])
    return p


def _ps_compose(g, x):
    """g(x(psi)) for a series x with zero constant term."""
    out = np.zeros(len(x), dtype=complex)
    out[0] = g[-1]
    for coef in g[-2::-1]:
        out = _ps_mul(out, x)
        out[0] += coef
    return out


def _input_series(m, c, eta_val):
    gamma = np.array(c, dtype=complex)
    if m % 2 == 0:
        gamma[m // 2 + 1] += eta_val
    elif eta_val != 0:
        raise ValueError("eta must vanish for odd m")
    return gamma


def _revert(m, gamma):
    """d_j with lambda = sum_j d_j N^{(2m-2j)/(m+2)} given N = sum_j gamma_j lambda^{e_j}."""
    order = len(gamma)
    if abs(gamma[0]) < 1e-14:
        raise DegenerateLeadError("leading coefficient c_{ell,0} vanishes")
    h = np.zeros(order, dtype=complex)
    h[0] = 1 / gamma[0]
    psi = np.zeros(order, dtype=complex)
    psi[1] = 1.0
    for _ in range(order + 1):
        x = _ps_mul(psi, _ps_pow(h, -2 / (m + 2)))
        h = _ps_pow(_ps_compose(gamma, x), -1.0)
    return _ps_pow(h, 2 * m / (m + 2))


@dataclass(frozen=True)
class ExpansionModel:
    m: int
    ell: int
    c: np.ndarray
    eta: complex
    rho: Fraction
    d: np.ndarray
    table: CoefficientTable | None = None

    @property
    def gamma(self) -> np.ndarray:
        """c with eta placed on its constant-exponent slot (even m)."""
        return _input_series(self.m, self.c, self.eta)

    def residual(self, n, lam) -> complex:
        """(n + 1/2) - sum_j c_j lambda^{e_j} - eta at a given lambda."""
        lam = complex(lam)
        s = sum(self.c[j] * lam ** float(exponent(self.m, j)) for j in range(self.m + 2))
        return (n + 0.5) - s - self.eta


def d_coeffs(model: ExpansionModel) -> np.ndarray:
    """Reversion coefficients d_{ell,j}, j = 0..m+1."""
    return _revert(model.m, model.gamma)


def expansion_model(spec: PotentialSpec) -> ExpansionModel:
    table = coefficient_table(spec)
    c = c_coeffs(spec, table)
    e = eta(spec, table)
    d = _revert(spec.m, _input_series(spec.m, c, e))
    closed = d0_closed_form(spec.m, spec.ell)
    if abs(d[0] - closed) > 1e-10 * closed:
        raise AssertionError(f"reversion lead {d[0]} disagrees with closed form {closed}")
    return ExpansionModel(spec.m, spec.ell, c, e, Fraction(1, 2) + Fraction(1, spec.m), d, table)


def estimate_eigenvalue(model: ExpansionModel, n: int, maxiter: int = 100) -> complex:
    """Solve the truncated expansion for lambda_n by damped Newton.

    Works in mu = lambda^{(m+2)/(2m)}, where the equation reads
    sum_j gamma_j mu^{1 - 2j/(m+2)} = n + 1/2.
    """
    m = model.m
    target = n + 0.5
    gamma = model.gamma
    p = np.array([1 - 2 * j / (m + 2) for j in range(len(gamma))])

    def F(mu):
        return np.sum(gamma * mu ** p) - target

    mu = complex(model.d[0] * target ** (2 * m / (m + 2))) ** ((m + 2) / (2 * m))
    f = F(mu)
    for _ in range(maxiter):
        if abs(f) <= 1e-12 * target:
            return mu ** (2 * m / (m + 2))
        df = np.sum(gamma * p * mu ** (p - 1))
        step = f / df
        t = 1.0
        while True:
            cand = mu - t * step
            fc = F(cand)
            if abs(fc) < abs(f) or t < 1e-6:
                break
            t *= 0.5
        mu, f = cand, fc
    if abs(f) <= 1e-10 * target:
        return mu ** (2 * m / (m + 2))
    raise NoConvergence(f"eigenvalue estimate for n={n} did not converge (|F|={abs(f):.3e})")


def spacing_estimate(model: ExpansionModel, n: int) -> float:
    m = model.m
    return (2 * m / (m + 2)) * float(model.d[0].real) * (n + 0.5) ** ((m - 2) / (m + 2))
