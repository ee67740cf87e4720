"""Exception types raised by the estimators and the command-line front end."""


class CircleRDSError(Exception):
    """Base class for all package errors."""


class NonConvergence(CircleRDSError):
    """Probe orbits failed to agree within tolerance.

    Either the composition length is too short or the system is not
    synchronizing (a common fixed point, an invariant measure, an isometry).
    ``estimate`` carries the point estimate that was rejected, when available.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateBall(CircleRDSError):
    """Too many empirical ball masses were zero for the requested radius."""


class DegenerateGap(CircleRDSError):
    """Singular values of a matrix product are too close to separate directions."""


class HypothesisViolation(CircleRDSError):
    """The driving measure fails the standing hypotheses (see ``HypothesisReport``)."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(CircleRDSError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field and field not in message else message)
        self.field = field
        self.detail = message
