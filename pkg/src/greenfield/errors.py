"""Exception types shared across the package."""


class GreenfieldError(Exception):
    """Base class for all package errors."""


class DomainError(GreenfieldError):
    """An argument is outside the mathematical domain of an operation."""


class InputError(GreenfieldError):
    """Malformed textual input (rationals, forms, system files)."""


class DimensionMismatch(GreenfieldError):
    """Operands disagree on the number of variables or vector length."""


class NotAMorphism(GreenfieldError):
    """The coordinate forms have a common projective zero (Res = 0)."""


class ResourceLimit(GreenfieldError):
    """A configured expansion/enumeration cap was exceeded."""


class PreconditionError(GreenfieldError):
    """A documented operation precondition was violated by the caller."""


class InternalCheckError(GreenfieldError):
    """An internal consistency check failed; indicates a bug, not bad input."""
