"""Exception hierarchy shared by every pipeline stage."""


class LfrStreamError(Exception):
    """Base class for all errors raised by lfr_stream."""


class ValidationError(LfrStreamError, ValueError):
    """Invalid input: parameters, degree sequences, edge lists or file contents."""


class UsageError(LfrStreamError, RuntimeError):
    """A streaming container was used outside its protocol (e.g. push after sort)."""


class LasVegasFailure(LfrStreamError):
    """A randomized repair loop gave up before producing a valid object.

    Attributes:
        defects: Remaining defect counts keyed by defect kind
    """

    def __init__(self, message: str, defects: dict[str, int] | None = None) -> None:
        super().__init__(message)
        self.defects = dict(defects or {})
