"""Eigenvalues, asymptotics and inverse problem for polynomial oscillators
-u'' + [(-1)^ell (iz)^m - P(iz)] u = lambda u on a pair of Stokes rays."""

from .errors import (
    ConfigError,
    ConvergenceFailure,
    GcdViolation,
    HypothesisViolation,
    MathDomainError,
    SpectraError,
)
from .model import (
    HalfIntegerPower,
    PotentialSpec,
    StokesGeometry,
    g_transform,
    is_pt_symmetric,
    normalize_translation,
    omega_power,
    translate,
)
from .expansion import (
    CoefficientTable,
    ExpansionModel,
    c_coeffs,
    coefficient_table,
    d_coeffs,
    estimate_eigenvalue,
    eta,
    expansion_model,
)
from .action import L_quadrature, L_series
from .sibuya import IntegratorConfig, f_at_origin, wronskian
from .spectrum import (
    EigenvalueRecord,
    certify_completeness,
    find_eigenvalues,
    spectral_determinant,
    verify_expansion,
    winding_number,
)
from .oracle import ContourGrid, collocation_spectrum, default_grid, refine_with_richardson
from .inverse import FitResult, PTVerdict, classify_pt, fit_expansion, recover_potential

__version__ = "0.1.0"
