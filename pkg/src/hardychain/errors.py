"""Exception hierarchy shared by all hardychain modules."""


class HardyChainError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HardyChainError, ValueError):
    """Malformed input: non-unit axes, unnormalized states, bad distributions."""


class InvalidMemberError(ValidationError):
    """A chain member or Hardy variant violates its index constraints."""


class DimensionError(ValidationError):
    """Qubit counts or array shapes that do not agree."""


class DomainError(ValidationError):
    """Argument outside the domain of a closed-form expression."""


class SingularityError(HardyChainError, ArithmeticError):
    """A formula hits a vanishing denominator."""


class ResourceLimitError(HardyChainError):
    """Requested size exceeds a configured enumeration or dimension cap."""


class ConvergenceError(HardyChainError):
    """An iterative method failed to reach its target.

    ``diagnostics`` carries whatever the solver knew when it gave up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
