"""Exception hierarchy shared by all fraxterp modules."""


class FraxError(Exception):
    """Base class for library errors."""


class StructuralError(FraxError, ValueError):
    """A scheme, map or operator is malformed (detected before any probing)."""


class DomainError(FraxError, ValueError):
    """A point lies outside the (co)domain it was applied to."""


class UnlocatableError(FraxError, ValueError):
    """A point is not covered by any piece image, even within tolerance."""


class NotContractiveError(FraxError, ValueError):
    def __init__(self, message, piece=None, sup=None):
        super().__init__(message)
        self.piece = piece
        self.sup = sup


class DepthExceededError(FraxError, RuntimeError):
    """Recursive evaluation did not reach the requested tolerance."""

    def __init__(self, message, partial=None, bound=None):
        super().__init__(message)
        self.partial = partial
        self.bound = bound


class PrecisionError(FraxError, ArithmeticError):
    """Multiprecision evaluation did not settle at the available precision."""


class ConfigError(FraxError, ValueError):
    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)
