"""Exception hierarchy.

Three families map onto the CLI exit-code contract: math-domain problems
(exit 3), convergence failures (exit 4) and violated hypotheses (exit 5).
"""


class SpectraError(Exception):
    """Base class for all package errors."""


class MathDomainError(SpectraError):
    exit_code = 3


class ConvergenceFailure(SpectraError):
    exit_code = 4


class HypothesisViolation(SpectraError):
    exit_code = 5


class PoleError(MathDomainError):
    """A Gamma/Beta argument sits on (or within 1e-9 of) a pole."""


class DegenerateLeadError(MathDomainError):
    """Leading expansion coefficient vanishes, reversion impossible."""


class BranchError(MathDomainError):
    """Argument lies on the branch cut of a fractional power."""


class SectorError(MathDomainError):
    """lambda lies outside the sector |arg lambda| <= pi - delta."""


class PoleOnPath(MathDomainError):
    """t^m + P(t) + lambda vanishes on the integration path [0, inf)."""


class DegenerateSlope(MathDomainError):
    """Triangular recovery hit a vanishing linear coefficient."""


class IllConditioned(MathDomainError):
    """Least-squares design matrix is too ill-conditioned."""


class NoConvergence(ConvergenceFailure):
    """An iterative solver ran out of iterations."""


class StepFail(ConvergenceFailure):
    """ODE integrator could not meet its tolerance."""


class QuadFail(ConvergenceFailure):
    """Quadrature did not reach the requested accuracy."""


class SeedCollision(ConvergenceFailure):
    """Two root searches converged onto the same zero."""


class PhaseJump(ConvergenceFailure):
    """Argument-principle sampling could not resolve the phase."""


class ResolutionFail(ConvergenceFailure):
    """Discretisation not converged: doubling N moved an eigenvalue."""


class ShiftBreakdown(ConvergenceFailure):
    """Shifted operator is numerically singular."""


class OverflowGuard(SpectraError):
    """Internal sentinel: log-scale bookkeeping produced a non-finite value."""


class GcdViolation(HypothesisViolation):
    """Inverse problem requires gcd(m, ell) = 1."""


class ConfigError(SpectraError):
    exit_code = 2
