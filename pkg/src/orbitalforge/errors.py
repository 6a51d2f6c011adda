"""Exception taxonomy shared across the package.

CLI exit-code mapping: ConfigurationError -> 64, DegenerateInputError -> 2,
NumericalFailureError (and subclasses) -> 3.
"""


class OrbitalForgeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OrbitalForgeError):
    """Unsupported family/rank/size combination or invalid run configuration."""


class DegenerateInputError(OrbitalForgeError):
    """Input on (or too close to) a root hyperplane or other singular locus.

    ``root`` carries the offending root's coordinates when known.
    """

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class NumericalFailureError(OrbitalForgeError):
    """A numerical procedure failed (ill-conditioning, non-convergence)."""


class ResourceError(NumericalFailureError):
    """A safety bound (group closure size, iteration cap) was exceeded."""


class ResolutionError(NumericalFailureError):
    """Quadrature or grid refinement failed to converge."""
