"""Independent eigenvalue solver: finite differences on the bent two-ray
contour z = z_c + e^{i theta_+-} x, x in [0, X], with Dirichlet ends.

Each ray carries  -e^{-2 i theta} u_xx + V(e^{i theta} x) u = lambda u.  The
two half problems share u(0); continuity of du/dz at the corner eliminates
u(0) and leaves a standard sparse eigenproblem of bandwidth ~ 2 * scheme.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .errors import ResolutionFail, ShiftBreakdown
from .expansion import estimate_eigenvalue, expansion_model
from .model import PotentialSpec, translate
from .spectrum import EigenvalueRecord

__all__ = [
    "ContourGrid",
    "RichardsonResult",
    "default_grid",
    "turning_points",
    "ray_operator",
    "ray_spectrum",
    "collocation_spectrum",
    "refine_with_richardson",
]

log = logging.getLogger(__name__)

# one-sided first derivative at x_0 and second derivative at x_1 (uses x_0..x_5)
_D1 = {2: np.array([-3.0, 4.0, -1.0]) / 2.0,
       4: np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0}
_D2_NEAR = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0
_D2_CENTRAL = {2: np.array([1.0, -2.0, 1.0]),
               4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0}


@dataclass(frozen=True)
class ContourGrid:
    """Two rays from the vertex ``corner``, N points each on [0, X]."""

    theta_plus: float
    theta_minus: float
    X: float
    N: int
    scheme: int = 4
    corner: complex = 0j

    def __post_init__(self):
        if self.N < 200:
            raise ValueError(f"need N >= 200 points per ray, got {self.N}")
        if self.scheme not in (2, 4):
            raise ValueError("scheme must be 2 or 4")
        if self.X <= 0:
            raise ValueError("truncation length must be positive")

    def refined(self, factor: int = 2) -> "ContourGrid":
        return replace(self, N=self.N * factor)

    def rotated(self, d_plus: float, d_minus: float) -> "ContourGrid":
        return replace(self, theta_plus=self.theta_plus + d_plus,
                       theta_minus=self.theta_minus + d_minus)


def turning_points(spec: PotentialSpec, lam: complex) -> np.ndarray:
    """Roots of V(z) - lambda."""
    m = spec.m
    c = np.zeros(m + 1, dtype=complex)
    c[0] = (-1) ** spec.ell * 1j ** m
    for j, aj in enumerate(spec.a, start=1):
        c[j] -= aj * 1j ** (m - j)
    c[m] -= lam
    return np.roots(c)


# Vertex position as a fraction of the midpoint between the two outer turning
# points of the highest requested level.  Eigenvalue condition numbers on
# rays through the origin grow quickly with n; bending the contour towards
# the anti-Stokes line keeps them moderate (0.8 was best over m = 3..6).
CORNER_FRACTION = 0.8


def default_grid(spec: PotentialSpec, count: int, N: int = 800, scheme: int = 4) -> ContourGrid:
    """Grid on the boundary ray directions, vertex pulled towards the turning
    points of the top level, X past those turning points with |Re F| >= 30."""
    m = spec.m
    th_p, th_m = spec.geometry.boundary_ray_angles
    lam_top = estimate_eigenvalue(expansion_model(spec), max(count - 1, 0))
    tp = turning_points(spec, lam_top)
    z_p = min(tp, key=lambda z: abs(np.angle(z * np.exp(-1j * th_p))))
    z_m = min(tp, key=lambda z: abs(np.angle(z * np.exp(-1j * th_m))))
    zc = complex(CORNER_FRACTION * 0.5 * (z_p + z_m))
    x_f = (15.0 * (m + 2)) ** (2.0 / (m + 2))
    X = max(x_f, 1.6 * max(abs(z_p - zc), abs(z_m - zc)) + 2.0)
    return ContourGrid(th_p, th_m, float(X), max(int(N), 10 * count, 200), scheme, zc)


def _ray_block(potential, theta, X, N, scheme):
    """Rows for the interior points x_1..x_{N-1} of one ray.

    Returns (rows, cols, vals, corner) with column 0 standing for u(0) and
    column i for u(x_i); ``corner`` is the one-sided derivative stencil.
    """
    h = X / N
    x = h * np.arange(N + 1)
    V = potential(np.exp(1j * theta) * x)
    k = -np.exp(-2j * theta) / h ** 2
    rows, cols, vals = [], [], []

    def add(i, js, cs):
        for j, c in zip(js, cs):
            if 0 <= j < N:  # u(x_N) = 0 and beyond
                rows.append(i)
                cols.append(j)
                vals.append(k * c)
        rows.append(i)
        cols.append(i)
        vals.append(V[i])

    c2 = _D2_CENTRAL[scheme]
    half = len(c2) // 2
    for i in range(1, N):
        if scheme == 4 and i == 1:
            add(i, range(0, 6), _D2_NEAR)
        else:
            add(i, range(i - half, i + half + 1), c2)
    return rows, cols, vals, _D1[scheme] / h


def ray_operator(potential, theta_plus: float, theta_minus: float, X: float, N: int,
                 scheme: int = 4):
    """Sparse matrix of -d^2/dz^2 + V on the two-ray contour.

    Unknown ordering is u(x_{N-1}^-), ..., u(x_1^-), u(x_1^+), ..., u(x_{N-1}^+),
    which keeps the matrix banded across the corner.
    """
    n = N - 1
    pos = lambda i: n + i - 1  # noqa: E731  (ray +, i >= 1)
    neg = lambda i: n - i      # noqa: E731  (ray -, i >= 1)
    blocks = [_ray_block(potential, theta_plus, X, N, scheme),
              _ray_block(potential, theta_minus, X, N, scheme)]
    # u(0) = sum_j w_+j u_j^+ + sum_j w_-j u_j^- from e^{-i th+} D+ u = e^{-i th-} D- u
    ep, em = np.exp(-1j * theta_plus), np.exp(-1j * theta_minus)
    d1 = blocks[0][3]
    den = d1[0] * (ep - em)
    w_plus = -ep * d1[1:] / den
    w_minus = em * d1[1:] / den
    R, C, Vv = [], [], []
    for (rows, cols, vals, _), idx, w_own, w_other, idx_other in (
            (blocks[0], pos, w_plus, w_minus, neg),
            (blocks[1], neg, w_minus, w_plus, pos)):
        for r, c, v in zip(rows, cols, vals):
            if c == 0:
                for j, w in enumerate(w_own, start=1):
                    R.append(idx(r)); C.append(idx(j)); Vv.append(v * w)
                for j, w in enumerate(w_other, start=1):
                    R.append(idx(r)); C.append(idx_other(j)); Vv.append(v * w)
            else:
                R.append(idx(r)); C.append(idx(c)); Vv.append(v)
    return sparse.csc_matrix((Vv, (R, C)), shape=(2 * n, 2 * n), dtype=complex)


def ray_spectrum(potential, theta_plus: float, theta_minus: float, X: float, N: int,
                 count: int, scheme: int = 4, shift: complex = 0.0) -> np.ndarray:
    """Lowest ``count`` eigenvalues (by |lambda|) of the two-ray operator.

    Shift-invert Arnoldi around ``shift``; a singular factorization is
    retried with a perturbed shift.
    """
    A = ray_operator(potential, theta_plus, theta_minus, X, N, scheme)
    k = min(count + 4, A.shape[0] - 2)
    sigma = complex(shift)
    for attempt in range(4):
        try:
            vals = spla.eigs(A, k=k, sigma=sigma, which="LM", return_eigenvectors=False,
                             tol=1e-14, maxiter=20000)
            break
        except (RuntimeError, spla.ArpackError) as exc:
            log.info("shift %s failed (%s); perturbing", sigma, exc)
            sigma = sigma + (0.137 + 0.071j) * (attempt + 1)
    else:
        raise ShiftBreakdown(f"factorization of A - sigma I failed near sigma = {shift}")
    vals = np.asarray(vals)
    return vals[np.argsort(np.abs(vals))][:count]


def _levels(spec, grid, count, shift=0.0):
    moved = spec.with_a(translate(spec, -grid.corner)) if grid.corner else spec
    return ray_spectrum(moved.potential, grid.theta_plus, grid.theta_minus,
                        grid.X, grid.N, count, grid.scheme, shift)


def collocation_spectrum(spec: PotentialSpec, count: int, grid: ContourGrid | None = None,
                         check_resolution: bool = True, rel_tol: float = 1e-6):
    """Lowest ``count`` eigenvalues of the discretized operator.

    With ``check_resolution`` the computation is repeated with 2N points and
    ResolutionFail is raised if any eigenvalue moves by more than ``rel_tol``.
    The returned values come from the finer grid in that case.
    """
    grid = default_grid(spec, count) if grid is None else grid
    if count > grid.N // 10:
        raise ResolutionFail(f"count {count} exceeds N/10 = {grid.N // 10}")
    shift = 0.0
    vals = _levels(spec, grid, count, shift)
    err = np.zeros(count)
    if check_resolution:
        fine = _levels(spec, grid.refined(), count, shift)
        err = np.abs(fine - vals)
        bad = err > rel_tol * np.maximum(np.abs(fine), 1.0)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ResolutionFail(f"eigenvalue {i} moved by {err[i]:.2e} when N doubled")
        vals = fine
    return [EigenvalueRecord(n, complex(v), 0.0, "oracle", float(e))
            for n, (v, e) in enumerate(zip(vals, err))]


@dataclass(frozen=True)
class RichardsonResult:
    records: tuple
    error: np.ndarray
    levels: np.ndarray
    monotone: bool


def refine_with_richardson(spec: PotentialSpec, count: int, grids) -> RichardsonResult:
    """Richardson extrapolation over grids with successively doubled N.

    Each adjacent pair is combined as (2^p f_fine - f_coarse)/(2^p - 1) with
    p the scheme order; the error bar is the difference of the last two
    extrapolants (or of the last two levels when only two grids are given).
    ``monotone`` is False if the level differences fail to shrink.
    """
    grids = list(grids)
    if len(grids) < 2:
        raise ValueError("need at least two grids")
    for g0, g1 in zip(grids[:-1], grids[1:]):
        if g1.N != 2 * g0.N or g1.scheme != g0.scheme:
            raise ValueError("grids must double N at fixed scheme")
    p = grids[0].scheme
    levels = np.array([_levels(spec, g, count) for g in grids])
    f = 2.0 ** p
    ext = (f * levels[1:] - levels[:-1]) / (f - 1)
    diffs = np.abs(np.diff(levels, axis=0))
    if len(ext) >= 2:
        err = np.abs(ext[-1] - ext[-2])
    else:
        err = diffs[-1] / (f - 1)
    monotone = bool(np.all(diffs[1:] <= diffs[:-1] * 1.5 + 1e-14)) if len(diffs) > 1 else True
    if not monotone:
        log.warning("Richardson levels do not converge monotonically")
    best = ext[-1]
    recs = tuple(EigenvalueRecord(n, complex(v), 0.0, "oracle", float(e))
                 for n, (v, e) in enumerate(zip(best, err)))
    return RichardsonResult(recs, err, levels, monotone)
