"""Exception types shared across the package."""


class TlsSpectroError(Exception):
    """Base class for all package-specific errors."""


class ToleranceNotAchieved(TlsSpectroError):
    """Adaptive integrator step size underflowed before meeting tolerance."""


class InvariantViolation(TlsSpectroError):
    """A density matrix broke trace/Hermiticity/positivity thresholds."""


class PeaksCollide(TlsSpectroError):
    """Both peak-search windows selected the same grid point."""


class EmptyWindow(TlsSpectroError):
    """A peak-search window contains no grid points."""


class SingularJacobian(TlsSpectroError):
    """Least-squares normal equations are singular beyond repair."""


class DegenerateColumn(TlsSpectroError):
    """Label column has q_max == q_min, normalization undefined."""


class IndexMismatch(TlsSpectroError):
    """Prediction and label sample indices do not line up."""


class FormatError(TlsSpectroError):
    """Binary map file violates the TLSM format contract."""
