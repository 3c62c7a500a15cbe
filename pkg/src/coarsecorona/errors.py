"""Exception hierarchy shared by all modules.

The CLI maps each class to an exit status, so new errors should subclass
one of these rather than ``Exception`` directly.
"""


class CoarseError(Exception):
    exit_code = 1


class PreconditionError(CoarseError, ValueError):
    """Input violates an operation's documented precondition."""

    exit_code = 1


class BudgetExceeded(CoarseError):
    """Ball enumeration hit the vertex budget.

    ``partial`` optionally carries whatever was computed before the limit.
    """

    exit_code = 2

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvariantViolation(CoarseError, AssertionError):
    """A construction produced an object that fails its own checks."""

    exit_code = 3
