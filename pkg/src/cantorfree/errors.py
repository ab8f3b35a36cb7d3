"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: invalid parameters exit with 2,
insufficient depth with 3, and internal contract failures with 4.
"""


class CantorFreeError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(CantorFreeError, ValueError):
    """An argument is outside its documented domain."""


class DepthLimitError(InvalidParameterError):
    """Requested depth exceeds the configured maximum."""


class DegenerateMetricError(InvalidParameterError):
    """A generator or file produced a matrix with a zero off-diagonal entry."""


class SizeLimitError(InvalidParameterError):
    """Input too large for a brute-force search (e.g. line embeddings)."""


class InsufficientDepthError(CantorFreeError, RuntimeError):
    """No admissible cylinder level exists at the metric's finite depth."""


class InternalCheckError(CantorFreeError, RuntimeError):
    """A guaranteed postcondition failed; always indicates a bug."""
