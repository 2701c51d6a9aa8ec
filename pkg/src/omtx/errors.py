"""Exception types shared across the package."""


class OmtxError(Exception):
    """Base class for all package-specific errors."""


class SingularResponseError(OmtxError):
    """Linear response is singular (parametric-divergence point).

    Carries the signal-pump detuning at which the response denominator
    underflowed the configured floor.
    """

    def __init__(self, delta, message=None):
        self.delta = delta
        super().__init__(message or f"singular linear response at delta={delta!r}")


class DivergenceError(OmtxError):
    """Time-domain trajectory escaped the amplitude ceiling (unstable regime)."""

    def __init__(self, escape_time, ceiling):
        self.escape_time = escape_time
        self.ceiling = ceiling
        super().__init__(
            f"|b| exceeded ceiling {ceiling:g} at t={escape_time:.6g} us"
        )


class WindowTooShortError(OmtxError):
    """Demodulation window does not fit inside the trajectory."""


class BracketError(OmtxError):
    """Bisection bracket endpoints do not straddle a sign change."""


class ConfigError(OmtxError):
    """Configuration text could not be parsed.

    ``line`` is the 1-based line number when the error is tied to one.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
