"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class FockError(Exception):
    """Base class for all library errors."""


class PreconditionError(FockError, ValueError):
    """An input violates an operation's documented precondition."""


class AlphabetMismatchError(PreconditionError):
    """Two values live over alphabets of different sizes."""


class ResourceError(FockError):
    """A computation would exceed a configured size cap."""


class NotDivisibleError(FockError):
    """Range containment fails in inner division."""


class ConvergenceError(FockError):
    """An iterative solver stopped before its tolerance was met.

    ``interval`` carries the best bracket known for the quantity.
    """

    def __init__(self, message, interval=(0.0, float("inf"))):
        super().__init__(message)
        self.interval = tuple(interval)
