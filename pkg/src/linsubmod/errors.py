class SubmodError(Exception):
    """Base class for library errors."""


class InvalidParam(SubmodError, ValueError):
    pass


class QueryBudgetExceeded(SubmodError):
    """Raised when an oracle with a query cap is asked for one more evaluation."""


class NotPSD(SubmodError, ValueError):
    pass


class EmptyAfterNormalization(SubmodError, ValueError):
    pass


class PreconditionViolated(SubmodError, ValueError):
    pass


class TooLarge(SubmodError, ValueError):
    pass


class ListExhausted(SubmodError):
    pass


class MatrixSearchTimeout(SubmodError):
    pass


class InvalidSpec(SubmodError, ValueError):
    pass


class UnknownSuite(SubmodError, KeyError):
    pass
