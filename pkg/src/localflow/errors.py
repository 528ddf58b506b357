"""Exception types shared across the package."""


class LocalFlowError(Exception):
    """Base class for all errors raised by localflow."""


class GraphFormatError(LocalFlowError):
    """Malformed edge list or attribute input."""


class TrappedMassError(LocalFlowError):
    """Excess mass sits on a node with no usable outgoing edges."""


class PushPreconditionError(LocalFlowError):
    """A push was requested on a node without positive excess."""


class ConductanceUndefinedError(LocalFlowError):
    """Conductance requested for an empty set or a zero-weight denominator."""
