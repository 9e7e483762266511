"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration or argument violates a documented precondition."""


class CapacityError(RuntimeError):
    """A requested simulation exceeds the representable tick/event range."""


class DataFormatError(ValueError):
    """A time-tag or histogram file is malformed.

    ``byte_offset`` points at the first offending byte where that is
    meaningful (binary input), otherwise it is None.
    """

    def __init__(self, message, byte_offset=None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class FitDegenerateError(RuntimeError):
    """Input data cannot constrain the requested fit."""


class FitFailedError(RuntimeError):
    """Optimizer did not converge; ``best`` carries the best point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
