"""Exception hierarchy shared by all hvq modules."""


class HVQError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameter(HVQError, ValueError):
    pass


class ZeroAtOrigin(HVQError, ValueError):
    """Autocorrelation vanishes at zero lag, so it cannot be normalized."""


class DimensionMismatch(HVQError, ValueError):
    pass


class BlockMixture(HVQError, ValueError):
    """A state meant to live in one J block has support in both."""


class GridTooSmall(HVQError, ValueError):
    pass


class BandLimitExceeded(HVQError, ValueError):
    pass


class NoCrossing(HVQError, ValueError):
    """<R> keeps one sign over the whole sampled window."""


class TagMismatch(HVQError, ValueError):
    """Attempt to superpose states carrying different initial conditions."""


class NonHermitian(HVQError, ValueError):
    pass


class ZeroAmplitude(HVQError, ValueError):
    pass


class ConfigError(HVQError, ValueError):
    """Bad run configuration (unknown key, unparsable value, ...)."""
