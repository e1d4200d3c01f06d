"""Exception types shared across the package."""


class SparseCovError(Exception):
    """Base class for all package-specific errors."""


class AsymmetryError(SparseCovError, ValueError):
    """Input matrix is too far from symmetric to repair by averaging."""


class EigenError(SparseCovError, RuntimeError):
    """Symmetric eigensolver failed to converge.

    Carries ``residual`` when a residual norm is available, else None.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NormOrderError(SparseCovError, ValueError):
    """Operator norm requested for an order without an exact formula."""


class DomainError(SparseCovError, ValueError):
    """A scalar map or divergence was evaluated outside its domain."""


class NotPSDError(DomainError):
    """Matrix expected to be positive semidefinite is not."""


class ConfigError(SparseCovError, ValueError):
    """Invalid or infeasible configuration parameters."""


class StructureError(SparseCovError, ValueError):
    """Object violates a required combinatorial or structural constraint."""


class BudgetError(SparseCovError, RuntimeError):
    """Exact enumeration would exceed the allowed budget.

    ``count`` holds the exact number of objects that enumeration would visit.
    """

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class DivergenceError(SparseCovError, ArithmeticError):
    """A series or integral failed to converge; ``ratio`` is the offending ratio."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class NumericalError(SparseCovError, ArithmeticError):
    """Non-finite intermediate value in a numerical routine."""


class SchemaError(SparseCovError, ValueError):
    """Record set cannot be serialized under a single flat schema."""


class FitError(SparseCovError, ValueError):
    """Regression input is degenerate or under-determined."""


class CellError(SparseCovError, RuntimeError):
    """Too many replicate failures inside one simulation cell."""
