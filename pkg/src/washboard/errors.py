"""Exception hierarchy for the washboard package."""


class WashboardError(Exception):
    """Base class for all washboard errors."""


# ---- cell catalog ----

class UnsupportedFrustration(WashboardError):
    """Requested frustration has no built-in unit cell."""


class ParseError(WashboardError):
    """Malformed cell file or run spec. Carries a 1-based line number."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column


class ValidationError(WashboardError):
    """A parsed document has an invalid or unknown key/value."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


# ---- transform ----

class SingularIncidence(WashboardError):
    """The incidence Gram matrix is numerically singular."""


class AsymmetricTarget(WashboardError):
    """The target matrix came out asymmetric: the cell data are inconsistent."""


class NotPositiveDefinite(WashboardError):
    """The target matrix admits no real factorization."""


class CanonicalMismatch(WashboardError):
    """A supplied canonical factor does not reproduce the target matrix."""


# ---- potential ----

class DimensionMismatch(WashboardError):
    """A point or vector has the wrong number of components."""


class BadSliceSpec(WashboardError):
    """Fixed/free axes of a slice request do not partition the variables."""


# ---- stationary ----

class NoConvergence(WashboardError):
    """Newton iteration failed to reach the residual tolerance."""


class RootBranchLost(WashboardError):
    """The tracked boundary root could not be bracketed."""


# ---- dynamics ----

class InvalidConfig(WashboardError):
    """Inconsistent simulation configuration."""


class NumericalBlowup(WashboardError):
    """A state component left the trust region during integration."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NotPSD(WashboardError):
    """A covariance matrix is not positive semidefinite."""


class EmptyTrajectory(WashboardError):
    """Too few recorded frames for the requested observable."""


class MissingVelocities(WashboardError):
    """The trajectory has no velocity record."""


# ---- runner ----

class IOFailure(WashboardError):
    """An output artifact could not be written."""
