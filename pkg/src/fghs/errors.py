"""Exception taxonomy shared across the package.

Every error raised on purpose derives from FghsError so callers can catch
the package's failures without also swallowing numpy's.
"""


class FghsError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(FghsError):
    """Array shapes are inconsistent with the operation's contract."""


class ParameterDomainError(FghsError):
    """A scalar or array argument lies outside its legal domain."""


class NotPositiveDefiniteError(FghsError):
    """A matrix required to be positive definite is not."""


class InfeasibleSparsityError(FghsError):
    """Requested support size cannot be realized for the given dimension."""


class FormatError(FghsError):
    """A text file does not conform to the documented format."""
