"""Exception types raised by the library.

Each class names the contract it guards so callers can catch precisely.
"""


class EigenbridgeError(Exception):
    """Base class for all library errors."""


class RankDeficient(EigenbridgeError):
    """Orthonormalization hit a column with no independent component left."""


class NotSymmetric(EigenbridgeError):
    """Matrix is not symmetric (real) or Hermitian (complex) within tolerance."""


class NoConvergence(EigenbridgeError):
    """Eigenvalue iteration failed to converge."""


class PoleTooClose(EigenbridgeError):
    """Resolvent evaluated too close to the top of the spectrum."""


class NotUnit(EigenbridgeError):
    """Vector is not unit norm within tolerance."""


class NotOrthogonal(EigenbridgeError):
    """Vectors are not orthogonal within tolerance."""


class BadDimension(EigenbridgeError):
    """Dimension arguments violate a structural requirement."""


class BadParam(EigenbridgeError):
    """Scalar parameter outside its admissible range."""


class BadTheta(EigenbridgeError):
    """Perturbation strength must be strictly positive."""


class NoRoot(EigenbridgeError):
    """Secular equation has no root above the spectrum."""


class LengthMismatch(EigenbridgeError):
    """Paired arrays or processes have incompatible lengths."""


class TooFewPaths(EigenbridgeError):
    """Statistical check needs more sample paths than were supplied."""


class Degenerate(EigenbridgeError):
    """Input is degenerate for the requested operation."""


class BadVariance(EigenbridgeError):
    """Target variance for a moment check is invalid."""


class ConfigError(EigenbridgeError):
    """Experiment configuration violates an invariant."""
