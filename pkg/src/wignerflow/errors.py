"""Exception types shared across the package."""


class WignerFlowError(Exception):
    """Base class for all package-specific errors."""


class DomainOverflowError(WignerFlowError):
    """Potential evaluation overflowed the floating-point range."""


class UnsupportedOrderError(WignerFlowError):
    """A derivative order beyond the configured jet capacity was requested."""


class InvalidAsymmetryError(WignerFlowError):
    """|alpha| >= 1: the first excited state's node formula is undefined."""


class GridInsufficientError(WignerFlowError):
    """The phase-space grid cannot hold the state to the required accuracy."""


class NotConvergedError(WignerFlowError):
    """A flow-series evaluation was used where convergence is required."""


class LoopThroughZeroError(WignerFlowError):
    """A winding loop passes too close to a stagnation point."""


class NonIntegerWindingError(WignerFlowError):
    """Boundary refinement failed to produce a near-integer winding number."""


class ConfigError(WignerFlowError):
    """Malformed or inconsistent run configuration."""
