class BudgetExceeded(RuntimeError):
    """A configured resource budget (expansion size, word length, ...) was hit."""

    def __init__(self, what: str, limit, needed=None):
        self.what = what
        self.limit = limit
        self.needed = needed
        msg = f"budget exceeded: {what} (limit {limit}"
        msg += f", needed {needed})" if needed is not None else ")"
        super().__init__(msg)


class ConvergenceError(RuntimeError):
    """An iterative eigensolver did not converge within its iteration cap."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InvariantViolation(AssertionError):
    """A structural guarantee (degree bound, divisibility, ...) failed: a bug."""


class PreconditionError(ValueError):
    pass
