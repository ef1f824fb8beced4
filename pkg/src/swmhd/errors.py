"""Exception types shared across the package."""


class SWMHDError(Exception):
    """Base class for solver failures."""


class NonPositiveHeight(SWMHDError):
    """A water height became zero or negative.

    Raised by conversions and by the time stepper the moment any nodal
    height (including ghost nodes) fails h > 0.
    """


class UnsupportedOrder(SWMHDError, ValueError):
    """Requested accuracy order has no tabulated coefficients."""


class InvalidLF(SWMHDError):
    """The Lax-Friedrichs fallback flux cannot rescue positivity.

    The positivity limiter blends toward the LF flux; if even the LF
    split heights sit at or below the dry tolerance the current time
    step is too large.  The driver halves dt once before giving up.
    """
