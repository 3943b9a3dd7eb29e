"""Exception hierarchy.

Everything raised on purpose derives from :class:`CMinHashError`, which is a
``ValueError`` so callers that only care about "bad input" can catch that.
"""


class CMinHashError(ValueError):
    pass


class InvalidDimensionError(CMinHashError):
    pass


class InvalidArgumentError(CMinHashError):
    pass


class DimensionMismatchError(CMinHashError):
    pass


class EmptyVectorError(CMinHashError):
    """Hashing a vector with no nonzeros (the minimum is undefined)."""


class UndefinedSimilarityError(CMinHashError):
    """Both vectors empty, so f = 0 and a/f is undefined."""


class IncompatibleSketchError(CMinHashError):
    pass


class BudgetExceededError(CMinHashError):
    """The requested computation is larger than the caller's budget."""

    def __init__(self, message, count=None, budget=None):
        super().__init__(message)
        self.count = count
        self.budget = budget


class DatasetFormatError(CMinHashError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DatasetParseError(DatasetFormatError):
    pass
