"""Exception and warning types shared across the package."""


class QedSbsError(Exception):
    """Base class for all package errors."""


class QuadratureFailure(QedSbsError):
    """An adaptive quadrature could not reach the requested tolerance."""


class DopplerSingularity(QedSbsError):
    """The Doppler-shifted mode frequency vanishes."""


class TruncationTooSmall(QedSbsError):
    """The Fock-space truncation cannot represent the requested state."""

    def __init__(self, message, suggested=None):
        super().__init__(message)
        self.suggested = suggested


class NumericalIndefiniteness(QedSbsError):
    """A matrix expected to be positive semidefinite is significantly not."""


class DegenerateFrame(QedSbsError):
    """Polarization vectors do not span three dimensions."""


class ConfigError(QedSbsError):
    """Invalid run configuration."""


class LowThermalRatioWarning(UserWarning):
    """Cutoff-to-thermal ratio too small for the low-temperature closed forms."""


class RegimeBoundary(UserWarning):
    """A regime approximation was evaluated outside the interior of its regime."""


class ValidityWarning(UserWarning):
    """Times beyond the moving-dipole validity window were requested."""


class LargePatchWarning(UserWarning):
    """A macrofraction is too large for the point-like patch formula."""
