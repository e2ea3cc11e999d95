"""Exception types raised by pcg_eur."""


class PcgError(ValueError):
    """Base class for all library errors."""


class ParameterError(PcgError):
    pass


class SchemeError(PcgError):
    """A PCG parameter set cannot be used (degenerate angle, bad M, ...).

    ``reason`` is one of ``"degenerate-angle"``, ``"non-integer-M"``,
    ``"coprimality-failure"``.
    """

    def __init__(self, reason, message=None):
        self.reason = reason
        super().__init__(message or reason)


class CoverageError(PcgError):
    """The grid does not hold enough of the state's probability mass."""


class SamplingError(PcgError):
    """The fractional Fourier transform lost norm; the grid is too coarse."""


class ResolutionError(PcgError):
    """A bin is too narrow compared to the grid spacing."""


class EmptyBinError(PcgError):
    pass
