"""Inverse problem: fit the large-n expansion to eigenvalues, recover the
potential up to translation, and decide PT-symmetry."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSlope, GcdViolation, IllConditioned
from .expansion import c_coeffs, coefficient_table, eta, exponent
from .model import PotentialSpec, is_pt_symmetric, normalize_translation

__all__ = [
    "FitResult",
    "Recovery",
    "PTVerdict",
    "fit_expansion",
    "skipped_slots",
    "recover_potential",
    "classify_pt",
]


def _require_coprime(m: int, ell: int):
    if math.gcd(m, ell) != 1:
        raise GcdViolation(f"gcd(m, ell) = gcd({m}, {ell}) = {math.gcd(m, ell)} != 1")


def skipped_slots(m: int) -> tuple:
    """Indices j whose c_j vanishes identically (besides j = m+1)."""
    return (1,) + ((m // 2 + 1,) if m % 2 == 0 else ())


def _fit_columns(m: int):
    skip = set(skipped_slots(m)) | {m + 1}
    return [j for j in range(m + 2) if j not in skip]


@dataclass(frozen=True)
class FitResult:
    m: int
    ell: int
    c_star: np.ndarray
    eta_star: complex
    cov: np.ndarray          # covariance of (c_j for fitted j..., eta)
    cov_diag: np.ndarray     # per-c_j variance, zero on skipped slots
    eta_var: float
    n_used: tuple
    condition: float
    columns: tuple


def fit_expansion(records, m: int, ell: int, n_min: int = 10, n_max: int | None = None,
                  extra_terms: int = 2, weighted: bool = True) -> FitResult:
    """Weighted least squares of n + 1/2 on lambda_n^{(m+2-2j)/(2m)}.

    ``extra_terms`` appends the next exponents j = m+2, ... as nuisance
    columns that absorb the O(lambda^{-rho}) truncation error; they are not
    reported.  Without them the low-order coefficients a_j come back biased
    at the 1e-1 level from n in [10, 60].
    """
    _require_coprime(m, ell)
    recs = [r for r in records if r.n >= n_min and (n_max is None or r.n <= n_max)]
    cols = _fit_columns(m)
    n_par = len(cols) + 1 + extra_terms
    if len(recs) < max(2 * (m + 2), 2 * n_par):
        raise IllConditioned(f"need at least {max(2 * (m + 2), 2 * n_par)} records with n >= {n_min}, got {len(recs)}")
    n = np.array([r.n for r in recs], dtype=float)
    lam = np.array([r.lam for r in recs], dtype=complex)
    exps = [float(exponent(m, j)) for j in cols]
    exps += [float(exponent(m, m + 2 + i)) for i in range(extra_terms)]
    A = np.empty((len(recs), n_par), dtype=complex)
    for i, e in enumerate(exps[: len(cols)]):
        A[:, i] = lam ** e
    A[:, len(cols)] = 1.0
    for i, e in enumerate(exps[len(cols):]):
        A[:, len(cols) + 1 + i] = lam ** e
    y = n + 0.5
    rho = 0.5 + 1.0 / m
    w = np.abs(lam) ** rho if weighted else np.ones(len(recs))
    Aw = A * w[:, None]
    yw = y * w
    scale = np.linalg.norm(Aw, axis=0)
    As = Aw / scale
    cond = float(np.linalg.cond(As))
    if cond > 1e10:
        raise IllConditioned(f"design condition number {cond:.2e} > 1e10; raise n_min")
    sol, *_ = np.linalg.lstsq(As, yw.astype(complex), rcond=None)
    resid = yw - As @ sol
    dof = max(len(recs) - n_par, 1)
    s2 = float(np.vdot(resid, resid).real) / dof
    cov_s = s2 * np.linalg.inv(As.conj().T @ As)
    x = sol / scale
    cov = cov_s / np.outer(scale, scale)
    k = len(cols) + 1
    c_star = np.zeros(m + 2, dtype=complex)
    var = np.zeros(m + 2)
    for i, j in enumerate(cols):
        c_star[j] = x[i]
        var[j] = float(np.real(cov[i, i]))
    return FitResult(m, ell, c_star, complex(x[len(cols)]), cov[:k, :k], var,
                     float(np.real(cov[len(cols), len(cols)])),
                     (int(n.min()), int(n.max())), cond, tuple(cols))


@dataclass(frozen=True)
class Recovery:
    a: tuple
    sigma: np.ndarray
    jacobian: np.ndarray


def _targets(fit: FitResult) -> np.ndarray:
    return np.array([fit.c_star[j] for j in fit.columns] + [fit.eta_star], dtype=complex)


def _solve_sequential(m, ell, targets, columns):
    """a (with a_1 = 0) from the fitted c_j and eta, one coefficient at a time."""
    tmap = dict(zip(columns, targets[:-1]))
    eta_t = targets[-1]
    a = np.zeros(m, dtype=complex)
    for j in range(2, m + 1):
        use_eta = m % 2 == 0 and j == m // 2 + 1

        def value(t):
            trial = a.copy()
            trial[j - 1] = t
            spec = PotentialSpec(m, ell, tuple(trial))
            table = coefficient_table(spec)
            if use_eta:
                return eta(spec, table)
            return c_coeffs(spec, table)[j]

        v0, v1 = value(0.0), value(1.0)
        slope = v1 - v0
        if abs(slope) < 1e-12:
            raise DegenerateSlope(f"c_{j} does not depend on a_{j}")
        a[j - 1] = ((eta_t if use_eta else tmap[j]) - v0) / slope
    return a


def recover_potential(fit: FitResult, m: int | None = None, ell: int | None = None) -> Recovery:
    """Normalized coefficients a (a_1 = 0) reproducing the fitted expansion.

    Uncertainties are propagated linearly through the triangular solve; the
    map is holomorphic in the targets, so a complex finite-difference
    Jacobian suffices.
    """
    m = fit.m if m is None else m
    ell = fit.ell if ell is None else ell
    _require_coprime(m, ell)
    t = _targets(fit)
    a = _solve_sequential(m, ell, t, fit.columns)
    J = np.zeros((m, len(t)), dtype=complex)
    for i in range(len(t)):
        h = 1e-6 * max(1.0, abs(t[i]))
        tp = t.copy()
        tp[i] += h
        J[:, i] = (_solve_sequential(m, ell, tp, fit.columns) - a) / h
    cov_a = J @ fit.cov @ J.conj().T
    sigma = np.sqrt(np.maximum(np.real(np.diag(cov_a)), 0.0))
    return Recovery(tuple(complex(x) for x in a), sigma, J)


class PTVerdict(str, enum.Enum):
    PT_AFTER_TRANSLATION = "PT_after_translation"
    NOT_PT = "not_PT"
    INCONCLUSIVE = "inconclusive"


def classify_pt(data, m: int, ell: int, tol: float | None = None, n_min: int = 10,
                n_sigma: float = 3.0) -> PTVerdict:
    """Is V(z - z0) PT-symmetric for some z0?

    ``data`` is either a coefficient sequence a (checked directly after
    normalizing a_1 = 0; default tol 1e-9) or a list of eigenvalue records
    (fit, recover, then compare |Im a_j| with ``n_sigma`` propagated
    standard deviations; default tol 1e-3).
    """
    seq = list(data)
    if seq and not hasattr(seq[0], "lam"):
        spec = PotentialSpec(m, ell, tuple(seq))
        a0, _ = normalize_translation(spec)
        ok = is_pt_symmetric(a0, 1e-9 if tol is None else tol)
        return PTVerdict.PT_AFTER_TRANSLATION if ok else PTVerdict.NOT_PT
    _require_coprime(m, ell)
    rec = recover_potential(fit_expansion(seq, m, ell, n_min))
    im = np.abs(np.imag(rec.a))
    thr = (1e-3 if tol is None else tol) * max(1.0, float(np.linalg.norm(rec.a)))
    lo = im - n_sigma * rec.sigma
    hi = im + n_sigma * rec.sigma
    if np.any(lo > thr):
        return PTVerdict.NOT_PT
    if np.all(hi <= thr):
        return PTVerdict.PT_AFTER_TRANSLATION
    return PTVerdict.INCONCLUSIVE
