"""Exception types raised across the package."""


class TeleportError(Exception):
    """Base class for all package errors."""


class OddNError(TeleportError, ValueError):
    """Resource size is odd or nonpositive; only even N is supported."""


class DomainError(TeleportError, ValueError):
    """A real parameter lies outside its admissible domain."""


class DegenerateState(TeleportError, ValueError):
    pass


class ProtocolError(TeleportError):
    """A strategy was queried outside its horizon or produced an inconsistent chain."""


class ResourceSizeMismatch(TeleportError, ValueError):
    pass


class EnumerationTooLarge(TeleportError):
    pass


class NonFiniteObjective(TeleportError, ArithmeticError):
    pass


class TooLarge(TeleportError):
    """Fock-space oracle requested beyond its desk-scale limit."""


class ExtractionFailed(TeleportError):
    """Bob's conditional state is not a single-qubit superposition in the expected mode."""


class VerificationFailed(TeleportError):
    def __init__(self, message, pattern=None):
        super().__init__(message)
        self.pattern = pattern
