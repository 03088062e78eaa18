"""
Error types raised by the numeric modules and the experiment runner.
"""
from typing import Optional, Sequence


class LabError(Exception):
    """Base class for every error raised by the lab."""


class InvalidMesh(LabError):
    """Quadrature mesh parameters are not usable."""


class InvalidGrid(LabError):
    """Cartesian grid parameters are not usable."""


class StencilOutOfDomain(LabError):
    """A finite-difference stencil touched a point where the field cannot be evaluated."""


class ZeroFieldPoint(LabError):
    """Normalization hit a point where the field vanishes."""

    def __init__(self, location: Sequence[float]):
        self.location = tuple(float(c) for c in location)
        super().__init__(f"field vanishes at {self.location}")


class MeshTooCoarse(LabError):
    """Winding is too far from an integer for the mesh to be trusted."""


class InvalidCharge(LabError):
    """Electric charge must be non-zero."""


class InvalidRadius(LabError):
    """Radius or shell bounds out of range."""


class StringSingularity(LabError):
    """Point lies on the Dirac string of the active gauge patch."""

    def __init__(self, location: Sequence[float]):
        self.location = tuple(float(c) for c in location)
        super().__init__(f"point {self.location} lies on the Dirac string")


class OriginSingularity(LabError):
    """Point coincides with the monopole at the origin."""


class InvalidLoop(LabError):
    """Loop parameters are not usable."""


class Unsupported(LabError):
    """Requested representation or option is not implemented."""


class InvalidIndex(LabError):
    """Lorentz index outside 0..3."""


class CoincidentPoints(LabError):
    """Green's kernel evaluated at coincident points."""


class GeometryOverlap(LabError):
    """Evaluation loop intersects the source region."""


class DegenerateSample(LabError):
    """Wave sample cannot support the phase-constancy metric."""


class ConfigError(LabError):
    """Experiment configuration is invalid."""

    def __init__(self, key: str, message: Optional[str] = None):
        self.key = key
        super().__init__(message or key)


class IoError(LabError):
    """Report could not be written."""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"cannot write {path}: {reason}")


class InvalidMonopole(LabError):
    """Monopole configuration violates its invariants."""
