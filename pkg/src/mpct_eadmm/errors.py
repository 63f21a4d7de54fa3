"""Exception hierarchy for the MPCT solver package."""


class MpctError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MpctError):
    """Inconsistent array dimensions in problem data."""


class NonPositiveWeight(MpctError):
    """A cost or penalty entry that must be strictly positive is not."""


class EmptyBox(MpctError):
    """Box bounds define an empty (or degenerate) feasible interval."""


class HorizonTooShort(MpctError):
    """Prediction horizon below the minimum supported value (N >= 2)."""


class RankDeficientG2(MpctError):
    """The steady-state constraint matrix is numerically rank deficient."""


class FactorizationFailure(MpctError):
    """Block Cholesky factorization hit a non-positive pivot."""


class SupportViolation(MpctError):
    """The warmstart gain has significant entries outside its declared support."""


class SingularKkt(MpctError):
    """A dense KKT system could not be solved."""


class NumericalBreakdown(MpctError):
    """A non-finite value appeared in the solver iterates."""


class SingularConfiguration(MpctError):
    """Pendulum dynamics evaluated at a configuration with vanishing denominator."""


class ArtifactError(MpctError):
    """Malformed, corrupted or incompatible offline artifact file."""


class ConfigError(MpctError):
    """Invalid run configuration; the message carries the offending field path."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
