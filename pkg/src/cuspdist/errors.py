"""Exception types shared across the package."""


class CuspdistError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(CuspdistError):
    """Field data or input data violates a structural invariant."""


class NotSquarefree(ValidationError):
    """Requested quadratic field parameter m has a square factor."""


class NotClassNumberOne(ValidationError):
    """Requested field is not in the class-number-one whitelist."""


class PrecisionExhausted(CuspdistError):
    """A numeric decision could not be made at the working precision,
    or an iterative construction exceeded its cap."""


class UnsupportedField(CuspdistError):
    """Operation needs field data (e.g. a primitive-element polynomial)
    that this field does not carry."""


class GeneratorNotFound(CuspdistError):
    """No principal generator of an ideal was located within the search
    bound; signals corrupted field data or class number > 1."""


class NonPositiveDefinite(ValidationError):
    """Matrix argument is not symmetric positive-definite."""


class BudgetExceeded(CuspdistError):
    """Candidate enumeration passed its configured cap; the input point is
    extreme and should be reduced first."""


class ViolationFound(CuspdistError):
    """A theorem-level bound failed on a concrete input.  Must never fire on
    valid field data; carries the counterexample report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
