"""Exception types shared across the package."""


class CodewordError(ValueError):
    """Base class for invalid-input errors raised by this package."""


class NormalizationError(CodewordError):
    pass


class DimensionError(CodewordError):
    pass


class DomainError(CodewordError):
    pass


class EndpointSingularityError(CodewordError):
    """Fisher information is 0/0 at mu in {0, 1} and the encoding has no limit."""
