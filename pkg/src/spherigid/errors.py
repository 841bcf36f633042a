"""Exception types shared across the package."""

from __future__ import annotations


class SpherigidError(Exception):
    """Base class for every error raised by this package."""


class BadDimension(SpherigidError):
    """Dimension outside the supported range (hypersurface dimension < 2, or mismatched shapes)."""


class DimensionTooLarge(SpherigidError):
    """Ambient dimension too large for a brute-force search."""


class EmptyInput(SpherigidError):
    """An operation received an empty point set or mesh."""


class AntipodalPoints(SpherigidError):
    """Two sphere points are antipodal (or too close to it) for the requested operation."""


class DegenerateImmersion(SpherigidError):
    """A chart is rank-deficient, discontinuous across a seam, or produced a non-symmetric shape matrix."""


class DegenerateEnclosure(SpherigidError):
    """The smallest enclosing ball degenerates (radius reaches pi)."""


class SingularGaussMap(SpherigidError):
    """The transported Gauss map has a singular differential somewhere on the mesh."""


class NonIntegerDegree(SpherigidError):
    """Degree quadrature did not land near an integer."""


class ThetaOutOfRange(SpherigidError):
    """Isoparametric family parameter outside the open interval (0, pi/6)."""


class OutsideHemisphere(SpherigidError):
    """A point left the open upper hemisphere of the central projection."""


class TrivialGroup(SpherigidError):
    """The isometry group has no non-identity element."""


class NotInvariant(SpherigidError):
    """A mesh is not invariant under the given isometry group."""


class RTooLarge(SpherigidError):
    """The covering-check radius is not below half the separation."""


class SamplingTooCoarse(SpherigidError):
    """A sampled search (boundary of a fundamental domain) produced no usable points."""


class ConfigError(SpherigidError):
    """Malformed configuration file, flag value, or chart specification."""
