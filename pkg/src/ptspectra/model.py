"""Problem definition: potential coefficients, rotation constant, rays and
sectors, translations and the coefficient rotation G.

The operator is  -u'' + [(-1)^ell (iz)^m - P(iz)] u = lambda u  with
P(z) = a_1 z^{m-1} + ... + a_m, decaying along the two rays
arg z = -pi/2 +- (ell+1) pi/(m+2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ConfigError

__all__ = [
    "HalfIntegerPower",
    "PotentialSpec",
    "StokesGeometry",
    "unit_turn",
    "omega_power",
    "g_transform",
    "translate",
    "normalize_translation",
    "is_pt_symmetric",
]


@dataclass(frozen=True)
class HalfIntegerPower:
    """An exponent in (1/2)Z, stored exactly as ``numerator / 2``."""

    numerator: int

    @classmethod
    def of(cls, value) -> "HalfIntegerPower":
        if isinstance(value, HalfIntegerPower):
            return value
        frac = Fraction(value) if not isinstance(value, float) else Fraction(value).limit_denominator(2)
        twice = 2 * frac
        if twice.denominator != 1:
            raise ValueError(f"exponent {value!r} is not a half-integer")
        return cls(int(twice))

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 2)

    def __add__(self, other):
        return HalfIntegerPower(self.numerator + HalfIntegerPower.of(other).numerator)

    def __neg__(self):
        return HalfIntegerPower(-self.numerator)


def _as_fraction(alpha) -> Fraction:
    if isinstance(alpha, HalfIntegerPower):
        return alpha.value
    if isinstance(alpha, (Rational, int)):
        return Fraction(alpha)
    return None


def unit_turn(turns) -> complex:
    """exp(2 pi i * turns), exact at quarter turns when ``turns`` is rational."""
    frac = _as_fraction(turns)
    if frac is None:
        return cmath.exp(2j * math.pi * float(turns))
    frac = frac - math.floor(frac)
    exact = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j, Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}
    if frac in exact:
        return exact[frac]
    return cmath.exp(2j * math.pi * float(frac))


@dataclass(frozen=True)
class StokesGeometry:
    """Rotation constant and ray/sector geometry for a given (m, ell)."""

    m: int
    ell: int

    @property
    def omega(self) -> complex:
        return unit_turn(Fraction(1, self.m + 2))

    @property
    def sector_half_width(self) -> float:
        return math.pi / (self.m + 2)

    def sector_center(self, k: int) -> float:
        return 2 * k * math.pi / (self.m + 2)

    @property
    def sector_centers(self) -> tuple:
        return tuple(self.sector_center(k) for k in range(self.m + 2))

    @property
    def boundary_ray_angles(self) -> tuple:
        w = (self.ell + 1) * math.pi / (self.m + 2)
        return (-math.pi / 2 + w, -math.pi / 2 - w)

    def in_sector(self, z: complex, k: int) -> bool:
        d = cmath.phase(z) - self.sector_center(k)
        d = (d + math.pi) % (2 * math.pi) - math.pi
        return abs(d) < self.sector_half_width


def omega_power(geom, alpha) -> complex:
    """omega^alpha = exp(2 pi i alpha / (m+2)); ``geom`` may also be m itself.

    ``alpha`` may be complex (e.g. mu(a) for complex coefficients).
    """
    m = geom if isinstance(geom, int) else geom.m
    frac = _as_fraction(alpha)
    if frac is None:
        return cmath.exp(2j * math.pi * complex(alpha) / (m + 2))
    return unit_turn(frac / (m + 2))


def _coerce_a(a, m):
    out = tuple(complex(x) for x in a)
    if len(out) != m:
        raise ConfigError(f"expected {m} coefficients a_1..a_m, got {len(out)}")
    return out


@dataclass(frozen=True)
class PotentialSpec:
    m: int
    ell: int
    a: tuple = field(default=None)

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 3:
            raise ConfigError(f"m must be an integer >= 3, got {self.m!r}")
        if not isinstance(self.ell, (int, np.integer)) or not 1 <= self.ell <= self.m - 1:
            raise ConfigError(f"ell must lie in [1, m-1] = [1, {self.m - 1}], got {self.ell!r}")
        a = (0,) * self.m if self.a is None else self.a
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "a", _coerce_a(a, self.m))

    @property
    def geometry(self) -> StokesGeometry:
        return StokesGeometry(self.m, self.ell)

    @property
    def omega(self) -> complex:
        return self.geometry.omega

    def with_a(self, a) -> "PotentialSpec":
        return PotentialSpec(self.m, self.ell, tuple(a))

    def potential(self, z):
        """V(z) = (-1)^ell (iz)^m - P(iz), vectorised over z."""
        z = np.asarray(z, dtype=complex)
        w = 1j * z
        p = np.zeros_like(w)
        for c in self.a:
            p = p * w + c
        return (-1) ** self.ell * w ** self.m - p


def g_transform(spec, ell, m=None) -> tuple:
    """G^ell(a)_j = omega^{(m+2-j) ell} a_j, with ell in (1/2)Z handled exactly.

    ``spec`` is a PotentialSpec, or a coefficient sequence when ``m`` is given.
    """
    if isinstance(spec, PotentialSpec):
        m, a = spec.m, spec.a
    else:
        a = tuple(complex(x) for x in spec)
        m = len(a) if m is None else m
    e = HalfIntegerPower.of(ell).value
    return tuple(omega_power(m, (m + 2 - j) * e) * a[j - 1] for j in range(1, m + 1))


def _shifted_coefficients(m, ell, a, w0):
    # Coefficients of P'(w) = (-1)^ell [w^m - (w - w0)^m] + P(w - w0), w = iz.
    # P' has degree < m because the w^m terms cancel.
    desc = np.zeros(m + 1, dtype=complex)  # desc[d] multiplies w^d
    sign = (-1) ** ell

    def add_power(coef, deg):
        for i in range(deg + 1):
            desc[i] += coef * math.comb(deg, i) * (-w0) ** (deg - i)

    desc[m] += sign
    add_power(-sign, m)
    for j, aj in enumerate(a, start=1):
        add_power(aj, m - j)
    return tuple(desc[m - j] for j in range(1, m + 1))


def translate(spec: PotentialSpec, z0: complex) -> tuple:
    """Coefficients a' whose potential is V(z - z0)."""
    z0 = complex(z0)
    if z0 == 0:
        return tuple(spec.a)
    return _shifted_coefficients(spec.m, spec.ell, spec.a, 1j * z0)


def normalize_translation(spec: PotentialSpec):
    """Return (a', z0) with a'_1 = 0 and V_{a'}(z) = V_a(z - z0)."""
    if spec.a[0] == 0:
        return tuple(spec.a), 0j
    w0 = -((-1) ** spec.ell) * spec.a[0] / spec.m
    z0 = w0 / 1j
    out = list(translate(spec, z0))
    out[0] = 0j  # exact zero; the residual is rounding only
    return tuple(out), z0


def is_pt_symmetric(a, tol: float = 1e-9) -> bool:
    a = np.asarray(a, dtype=complex)
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = max(1.0, float(np.linalg.norm(a)))
    return bool(np.max(np.abs(a.imag), initial=0.0) <= tol * scale)
