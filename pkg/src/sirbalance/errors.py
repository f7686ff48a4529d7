"""Exception hierarchy for the solver library.

Every error raised on purpose derives from :class:`SirBalanceError`, so
callers (and the CLI) can distinguish our diagnostics from genuine bugs.
"""


class SirBalanceError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SirBalanceError):
    """Array shapes do not match the declared link/constraint counts."""


class DomainError(SirBalanceError):
    """A numeric argument lies outside the operation's domain."""


class InvalidChannel(SirBalanceError):
    """Raw channel data violates its invariants (e.g. non-positive diagonal)."""


class InvalidScenario(SirBalanceError):
    """A scenario file or dict cannot be turned into a valid problem."""


class NotIrreducible(SirBalanceError):
    """A matrix required to be irreducible is not.

    ``index`` carries the offending constraint number (1-based) when the
    failure concerns one of the extended matrices, else None.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NoConvergence(SirBalanceError):
    """An iteration exhausted its budget.

    ``payload`` holds the best iterate so the caller can inspect or resume.
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class SpectralRadiusViolation(SirBalanceError):
    """A Neumann-series fixed point does not exist (spectral radius >= 1)."""


class NotOnBoundary(SirBalanceError):
    """A QoS point required to lie on the feasibility boundary does not."""


class NoFeasibleT(SirBalanceError):
    """No positive balancing threshold is feasible (impossible for valid input)."""


class UnsupportedDimension(SirBalanceError):
    """The operation is only available for a specific link count (K = 2)."""


class InternalInvariantViolation(SirBalanceError):
    """A property guaranteed by theory failed numerically; indicates a bug."""
