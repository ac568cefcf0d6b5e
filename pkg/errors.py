"""
Error Types

Every failure the toolkit can raise. All of them are ValueErrors so callers
that only care about "bad input" can catch one thing; the CLI reads
``exit_code`` to tell usage problems from numerical ones.
"""


class QMonoError(ValueError):
    """Base class for all toolkit errors"""
    exit_code = 2


# --- Usage / input errors (exit 2) ---

class BadLabels(QMonoError):
    """Qubit labels that are missing, repeated, or do not cover the state"""


class NotTwoQubit(QMonoError):
    """A two-qubit-only measure was handed a larger (or smaller) state"""


class BadAlpha(QMonoError):
    """Exponent outside the validity range of the inequality"""


class BadInput(QMonoError):
    """Scalar arguments outside their domain"""


class BadNormalization(QMonoError):
    """State or parameter vector not normalized within tolerance"""


class BadSize(QMonoError):
    """Qubit count or rank out of range"""


class TooFewQubits(QMonoError):
    """State too small for the requested inequality"""


class TooManyBlocks(QMonoError):
    """Block grouping too large for the exhaustive ordering search"""


class RecipeSyntax(QMonoError):
    """Malformed recipe, cut or block string"""


# --- Numerical / environment failures (exit 3) ---

class NotHermitian(QMonoError):
    exit_code = 3


class NotPSD(QMonoError):
    exit_code = 3


class NoConvergence(QMonoError):
    """A LAPACK driver failed to converge"""
    exit_code = 3


class IOFailure(QMonoError):
    exit_code = 3
