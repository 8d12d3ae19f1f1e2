"""Exception hierarchy shared by all modules."""


class ElicitError(Exception):
    """Base class for all toolkit errors."""


class DegenerateInterval(ElicitError):
    """The mean identification value vanishes on an unbounded set."""


class OutOfRange(ElicitError, ValueError):
    pass


class NonConvex(ElicitError, ValueError):
    pass


class DimensionMismatch(ElicitError, ValueError):
    pass


class Unsupported(ElicitError):
    """The model family cannot absorb an additive shift (no intercept, or bounds hit)."""


class ParseError(ElicitError, ValueError):
    pass


class NonFiniteValue(ElicitError, ValueError):
    pass


class EmptyInput(ElicitError, ValueError):
    pass


class NoFeasibleStart(ElicitError):
    pass


class FingerprintMismatch(ElicitError, ValueError):
    """Curves were built from different datasets or functionals."""


class WidthError(ElicitError, ValueError):
    """Too few observations for the requested number of bins."""


class ZeroSlope(ElicitError, ValueError):
    pass


class WindowTooCoarse(ElicitError, ValueError):
    pass
