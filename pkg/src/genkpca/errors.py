"""Exception hierarchy shared by the library, CLI, and service.

Every error carries a ``category`` string so front ends can emit
machine-parsable ``error:<category>:<message>`` lines and map failures
to HTTP status codes without string matching.
"""


class GkpcaError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class InputError(GkpcaError, ValueError):
    """Caller passed invalid data: bad shapes, ranges, or non-finite values."""

    category = "input"


class FormatError(GkpcaError, ValueError):
    """A file could not be parsed: bad magic number, truncation, ragged rows."""

    category = "format"


class NumericError(GkpcaError, RuntimeError):
    """A numerical routine failed: eigensolver divergence, unstable filter."""

    category = "numeric"


class DegenerateSimilarityError(GkpcaError, RuntimeError):
    """Pre-image request has no usable neighborhood (all similarities zero)."""

    category = "degenerate"


class UsageError(GkpcaError, ValueError):
    """Command line invoked with invalid flags or flag values."""

    category = "usage"
