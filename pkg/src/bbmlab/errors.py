"""Exception types raised by bbmlab."""


class BBMLabError(Exception):
    """Base class for all library errors."""


class SymmetryError(BBMLabError, ValueError):
    """Spectral coefficients are not conjugate-symmetric."""


class NonContraction(BBMLabError):
    """Fixed-point iteration failed to contract (step too large or blow-up near)."""


class SeriesDivergence(BBMLabError):
    """Picard series terms stopped decaying geometrically."""


class BlowUpSuspected(BBMLabError):
    def __init__(self, monitor, value, t):
        super().__init__(f"blow-up suspected at t={t:.6g}: {monitor}={value:.6g}")
        self.monitor = monitor
        self.value = value
        self.t = t


class BandUnresolved(BBMLabError, ValueError):
    """Frequency band is too narrow for the grid or outside the dealiased range."""


class CertificationFailure(BBMLabError):
    """Sampled multiplier fell below the certified lower bound."""


class ResolutionInsufficient(BBMLabError, ValueError):
    """Quadrature does not resolve the oscillation of the integrand."""


class InflectionInInterval(BBMLabError, ValueError):
    """Phase has an inflection point inside the integration interval."""


class WraparoundWindowExceeded(BBMLabError, ValueError):
    """Requested time lets dispersive waves wrap around the periodic domain."""


class ConfigInvalid(BBMLabError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message
