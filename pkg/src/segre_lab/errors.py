"""Exception hierarchy shared by every module of the package."""


class SegreLabError(Exception):
    """Base class for all errors raised by segre_lab."""


class DimensionMismatch(SegreLabError, ValueError):
    """Vectors, matrices or points do not have compatible sizes."""


class InvalidPoint(SegreLabError, ValueError):
    """A coordinate vector is zero, has the wrong arity, or lives in another field."""


class PreconditionError(SegreLabError, ValueError):
    """An operation was called outside its documented domain."""


class FieldTooSmall(PreconditionError):
    """The coefficient field has too few points for a requested configuration."""


class ConstructionError(SegreLabError, RuntimeError):
    """A generator produced a set that fails its own invariant self-check."""


class BudgetExceeded(SegreLabError, RuntimeError):
    """A combinatorial search would exceed its configured budget.

    ``required`` carries the instance count (or estimate) that was refused.
    """

    def __init__(self, message: str, required: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.required = required
        self.budget = budget
