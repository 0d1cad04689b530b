"""Exception types raised by isidec."""


class IsidecError(Exception):
    """Base class for all library errors."""


class DomainError(IsidecError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceError(IsidecError, RuntimeError):
    """A request exceeds a configured size budget."""


class DegenerateInputError(IsidecError, ValueError):
    """The input sequence cannot identify the channel (singular Gram matrix)."""


class UsageError(IsidecError, ValueError):
    """Inconsistent dimensions, empty sets or malformed configuration."""
