"""Exception hierarchy shared by every drtool module."""


class DRToolError(Exception):
    """Base class for all drtool errors."""


class Empty(DRToolError, ValueError):
    """A vector was built from an empty coordinate list."""


class NonFinite(DRToolError, ValueError):
    """A NaN or infinite value appeared where a finite one is required.

    ``index`` carries the iteration number when raised by the engine.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DimensionMismatch(DRToolError, ValueError):
    pass


class NegativeBound(DRToolError, ValueError):
    pass


class InvalidParams(DRToolError, ValueError):
    pass


class NotOrthogonal(InvalidParams):
    pass


class NotInSubspace(InvalidParams):
    pass


class InsufficientData(DRToolError):
    pass


class NotAFixedPoint(DRToolError):
    pass


class MissingFunction(DRToolError):
    pass


class MissingTestPoint(DRToolError):
    pass


class NoConvergence(DRToolError):
    """Raised when a run exhausts its budget; ``residuals`` holds the last norms."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class AllInfinite(DRToolError):
    pass


class UnsupportedSet(DRToolError):
    pass


class ParseError(DRToolError):
    """Scenario file could not be parsed; ``where`` names the line or field."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


class ValidationError(DRToolError):
    """Scenario file parsed but violates invariants; ``problems`` lists all of them."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
