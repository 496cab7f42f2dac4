"""Exception hierarchy shared across the package.

Two families matter to callers: configuration problems (bad descriptors,
invalid parameter combinations) and numerical domain violations (defective
matrices, points off the curve).  The command line maps them to distinct
exit codes, so library code should raise the most specific type available.
"""

__all__ = [
    "CurvespecError",
    "ConfigError",
    "ClosedCurveError",
    "NumericalDomainError",
    "OffCurveError",
    "ParameterDomainError",
    "DefectiveMatrixError",
    "CoincidentPointsError",
    "MapProtocolError",
    "MixedWitnessError",
    "ReconstructionError",
]


class CurvespecError(Exception):
    """Base class for all package errors."""


class ConfigError(CurvespecError, ValueError):
    """Invalid configuration: bad descriptor, malformed value, impossible request."""


class ClosedCurveError(ConfigError):
    """An order-dependent operation was asked of a closed curve."""


class NumericalDomainError(CurvespecError):
    """Input lies outside the numerical domain of an operation."""


class OffCurveError(NumericalDomainError):
    """A point (or an eigenvalue) is farther than tol from the curve."""


class ParameterDomainError(NumericalDomainError):
    """A curve parameter falls outside the parametrization domain."""


class DefectiveMatrixError(NumericalDomainError):
    """Matrix is not semisimple up to tolerance; no spectral decomposition."""


class CoincidentPointsError(NumericalDomainError):
    """A configuration tuple contains coincident points."""


class MapProtocolError(NumericalDomainError):
    """A black-box map misbehaved: wrong output shape, non-finite entries,
    or an external program failure."""


class MixedWitnessError(NumericalDomainError):
    """Equivariance trials disagree; no unanimous verdict exists."""


class ReconstructionError(NumericalDomainError):
    """Conjugator or frame reconstruction failed its validation stage."""
