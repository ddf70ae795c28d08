"""Exception types shared across the package."""


class CellNetError(Exception):
    """Base class for package errors."""


class SpecParseError(CellNetError, ValueError):
    """Malformed network specification."""


class DegenerateDrawError(CellNetError):
    """A coefficient draw violates a genericity condition."""

    def __init__(self, conditions):
        if isinstance(conditions, str):
            conditions = [conditions]
        self.conditions = list(conditions)
        super().__init__("degenerate draw: " + "; ".join(self.conditions))


class NumericalFailure(CellNetError, RuntimeError):
    """A numerical step failed (singular solve, non-convergence, blow-up)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
