"""Exception types raised by the library."""


class InvalidStateError(ValueError):
    """A field or operator is in the wrong representation or bound to another grid."""


class PreconditionError(ValueError):
    """An input violates a documented precondition.

    The measured quantity that triggered the failure is kept on ``measured``
    so callers (and the CLI report) can show it.
    """

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured
