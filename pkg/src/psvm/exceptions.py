"""Exception types shared across the package."""


class PsvmError(Exception):
    """Base class for all library errors."""


class InvalidInputError(PsvmError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(PsvmError, ValueError):
    """A data file field could not be parsed; carries row/column context."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class DegenerateDataError(PsvmError, ValueError):
    """Data has no usable signal (e.g. zero variance for the bandwidth rule)."""


class NonPSDKernelError(PsvmError, ValueError):
    """A kernel matrix violates positive semidefiniteness beyond tolerance."""


class NumericFailureError(PsvmError, RuntimeError):
    """A numeric routine failed; carries solver diagnostics."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self) -> str:
        base = super().__str__()
        if self.diagnostics:
            detail = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
            return f"{base} ({detail})"
        return base


class OracleFailureError(PsvmError, RuntimeError):
    """The reference solver did not converge within its step budget."""
