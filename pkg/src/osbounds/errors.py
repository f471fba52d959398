"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: usage/input problems exit 2,
failed certifications exit 1.
"""


class OsboundsError(Exception):
    """Base class for package-specific errors."""


class NotPrimePower(OsboundsError, ValueError):
    """Requested field order has at least two distinct prime factors."""


class ZeroInverse(OsboundsError, ZeroDivisionError):
    """Multiplicative inverse of the zero element was requested."""


class DomainTooLarge(OsboundsError, ValueError):
    """Exact enumeration was requested beyond its size bound."""


class ImplicitFamily(OsboundsError, ValueError):
    """Operation requires an explicitly enumerated map family."""


class IndexOutOfRange(OsboundsError, IndexError):
    """Order-statistic index k outside 1..len(values)."""


class BoundViolation(OsboundsError, AssertionError):
    """A certified two-sided bound failed; carries the offending report.

    With exact arithmetic this falsifies the implementation, not the
    underlying inequality.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegenerateQuantile(OsboundsError, ValueError):
    """Quantile function integrates to zero; no norm can be derived."""


class NotInBall(OsboundsError, ValueError):
    """Input point lies outside the dual-function unit ball."""


class BudgetExceeded(OsboundsError, RuntimeError):
    """Randomized search exhausted its growth budget."""
