"""Exception types raised by markagg."""


class MarkaggError(Exception):
    """Base class for all library errors."""


class NotIrreducible(MarkaggError):
    """The support graph has no unique closed communicating class."""


class SupportViolation(MarkaggError):
    """A reference chain assigns zero probability where the other does not.

    ``context`` holds the offending context (tuple of states) and ``target``
    the next state, when known.
    """

    def __init__(self, message, context=None, target=None):
        super().__init__(message)
        self.context = context
        self.target = target


class WindowTooLarge(MarkaggError):
    pass


class InequalityViolation(MarkaggError):
    """The ordered chain of cost functions was violated (an implementation bug)."""


class InvalidConfig(MarkaggError, ValueError):
    pass


class UnsupportedCost(MarkaggError, ValueError):
    pass


class TooLarge(MarkaggError):
    pass


class DimensionMismatch(MarkaggError, ValueError):
    pass


class InvalidRates(MarkaggError, ValueError):
    pass


class AbsorbingState(MarkaggError):
    pass


class EmptyText(MarkaggError, ValueError):
    pass


class ParseError(MarkaggError, ValueError):
    pass
