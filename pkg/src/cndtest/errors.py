"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A distribution or mechanism parameter is out of range."""


class TrivialTradeoffError(ValueError):
    """The tradeoff function is (numerically) the trivial 1 - alpha line,
    so no fixed point below 1/2 exists and no noise distribution can be
    built for it."""


class RecursionCapError(RuntimeError):
    """Quantile recursion exceeded its iteration cap; the requested
    probability is pathologically close to 0 or 1 for a near-trivial
    tradeoff function."""


class BracketFailureError(RuntimeError):
    """A bisection could not bracket its target (degenerate pmf or
    noise distribution)."""


class QuadratureError(RuntimeError):
    """Gil-Pelaez quadrature failed to meet its error tolerance."""


class ConfigError(ValueError):
    """A simulation configuration failed validation."""
