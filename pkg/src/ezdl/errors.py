"""Exception types raised across the library.

Every error condition with a defined contract gets its own class so callers
can catch precisely.  All inherit from :class:`EzdlError`.
"""


class EzdlError(Exception):
    """Base class for all library-specific errors."""


# --- sparseness measure / targets ------------------------------------------

class ZeroVector(EzdlError):
    """All entries of a vector vanish where a nonzero vector is required."""


class DimensionTooSmall(EzdlError):
    """Vector dimension below the minimum of 2."""


class OutOfRange(EzdlError):
    """A scalar parameter lies outside its admissible interval."""


class InfeasibleSupport(EzdlError):
    """Requested support size cannot carry the target norms (d*l2^2 <= l1^2)."""


# --- projection -------------------------------------------------------------

class EmptySupport(EzdlError):
    """Shrinkage offset at or above the maximum entry leaves no support."""


class NonUniqueProjection(EzdlError):
    """The input admits more than one nearest point on the target set."""


class NumericalInconsistency(EzdlError):
    """Floating-point state violates an invariant beyond tolerance."""


class DegenerateGradient(EzdlError):
    """Gradient undefined because the sliced input is uniform (a <= 0)."""


class MaxRoundsExceeded(EzdlError):
    """Alternating projection support did not stabilize in the round budget."""


# --- linear algebra ---------------------------------------------------------

class ConvergenceFailure(EzdlError):
    """Iterative decomposition did not converge."""


class NotSymmetric(EzdlError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


# --- learning ---------------------------------------------------------------

class ZeroResponse(EzdlError):
    """Filter responses are exactly zero and cannot be sparsified."""


class ZeroVariance(EzdlError):
    """A vector has (numerically) zero centered variance."""


class InsufficientData(EzdlError):
    """Fewer learning samples available than required."""


# --- imaging ----------------------------------------------------------------

class MalformedHeader(EzdlError):
    """Image header does not parse."""


class UnsupportedMaxval(EzdlError):
    """Image maxval is not 255."""


class TruncatedData(EzdlError):
    """Image raster holds fewer bytes than the header promises."""


class InsufficientVariance(EzdlError):
    """Image cannot yield the requested number of non-constant patches."""


class RankDeficient(EzdlError):
    """Requested principal components exceed the numerical data rank."""


class DimensionMismatch(EzdlError):
    """Operands have incompatible shapes."""


class TooSmall(EzdlError):
    """Image smaller than the metric's window."""
